//! Seeded generator of synthetic household/person microdata.
//!
//! Households come in five kinds, drawn independently per household:
//!
//! | kind | share | contents |
//! |---|---|---|
//! | infant | 38% | couple with 1-2 natural-born children aged 0-2 |
//! | childless | 35% | couple, no children |
//! | older children | 15% | couple with 1-3 children aged 3-17 |
//! | single parent | 8% | householder without spouse, 0-2 children |
//! | extended | 4% | childless couple living with an uncle/aunt |
//!
//! Infant couples are drawn from three planted blobs over (father age,
//! mother age, father education, mother education, father income), listed in
//! [`BLOBS`]. Every other couple draws ages uniformly from 20-45, education
//! uniformly from 8-16 and income from a clipped normal around $40,000, so
//! the feature-absent group spans the whole age range. Each adult is disabled
//! with probability 4%. Housing tenure and building type lean towards
//! ownership and detached houses as the blob gets older, and towards renting
//! for childless couples. About 20% of couples have a female householder.
//!
//! The same seed and household count always produce the same bytes.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::microdata::{derive_families, emit_fixed_width, parse_microdata, FamilyUnit, RecordKind, SchemaSet};
use crate::search::pipeline::{AgeWindow, PipelineConfig};

/// Schema of the generated files.
pub const SYNTHETIC_SCHEMA: &str = include_str!("../schemas/synthetic.toml");

pub const DEFAULT_SEED: u64 = 2000;
pub const DEFAULT_HOUSEHOLDS: usize = 6000;

pub fn synthetic_schema() -> SchemaSet {
    SchemaSet::from_toml(SYNTHETIC_SCHEMA).expect("bundled schema is valid")
}

/// One planted cluster of infant families: means and standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedBlob {
    pub name: &'static str,
    pub weight: f64,
    pub father_age: (f64, f64),
    pub mother_age: (f64, f64),
    pub father_education: (f64, f64),
    pub mother_education: (f64, f64),
    pub father_income: (f64, f64),
    /// Probabilities of tenure codes 1-4.
    pub tenure: [f64; 4],
    /// Probabilities of building codes 1-4.
    pub building: [f64; 4],
}

pub const BLOBS: [PlantedBlob; 3] = [
    PlantedBlob {
        name: "middle",
        weight: 0.1645,
        father_age: (32.0, 2.0),
        mother_age: (30.0, 2.0),
        father_education: (12.0, 0.6),
        mother_education: (12.0, 0.6),
        father_income: (50_000.0, 6_000.0),
        tenure: [0.55, 0.1, 0.32, 0.03],
        building: [0.04, 0.6, 0.1, 0.26],
    },
    PlantedBlob {
        name: "young",
        weight: 0.5468,
        father_age: (26.0, 2.0),
        mother_age: (24.0, 2.0),
        father_education: (9.0, 0.6),
        mother_education: (9.0, 0.6),
        father_income: (25_000.0, 5_000.0),
        tenure: [0.3, 0.05, 0.6, 0.05],
        building: [0.08, 0.4, 0.1, 0.42],
    },
    PlantedBlob {
        name: "older",
        weight: 0.2887,
        father_age: (38.0, 2.0),
        mother_age: (36.0, 2.0),
        father_education: (15.0, 0.6),
        mother_education: (15.0, 0.6),
        father_income: (90_000.0, 8_000.0),
        tenure: [0.7, 0.12, 0.16, 0.02],
        building: [0.02, 0.75, 0.1, 0.13],
    },
];

const CHILDLESS_TENURE: [f64; 4] = [0.35, 0.1, 0.5, 0.05];
const CHILDLESS_BUILDING: [f64; 4] = [0.05, 0.4, 0.1, 0.45];
const ANCESTRY: [i64; 6] = [32, 50, 51, 210, 706, 939];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthParams {
    pub seed: u64,
    pub households: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            households: DEFAULT_HOUSEHOLDS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Infant(usize),
    Childless,
    OlderChildren,
    SingleParent,
    Extended,
}

struct Adult {
    age: i64,
    education: i64,
    income: i64,
}

struct Generator {
    rng: ChaCha8Rng,
    schema: SchemaSet,
    out: String,
}

fn normal(rng: &mut ChaCha8Rng, (mean, sd): (f64, f64)) -> f64 {
    // clip at three standard deviations so planted blobs stay compact
    let x = Normal::new(mean, sd).expect("positive sd").sample(rng);
    x.clamp(mean - 3.0 * sd, mean + 3.0 * sd)
}

fn pick(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let mut u: f64 = rng.random();
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    probs.len() - 1
}

fn code(v: i64, width: usize) -> String {
    format!("{v:0width$}")
}

fn blank(width: usize) -> String {
    " ".repeat(width)
}

impl Generator {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            schema: synthetic_schema(),
            out: String::new(),
        }
    }

    fn emit(&mut self, kind: RecordKind, raw: Vec<String>) {
        let line = emit_fixed_width(&self.schema, kind, &raw).expect("generated values fit the schema");
        self.out.push_str(&line);
        self.out.push('\n');
    }

    fn household_line(&mut self, serial: usize, tenure: &[f64; 4], building: &[f64; 4]) {
        let ten = pick(&mut self.rng, tenure) as i64 + 1;
        let bld = match pick(&mut self.rng, building) {
            3 => self.rng.random_range(4..=8),
            b => b as i64 + 1,
        };
        let vehicles = self.rng.random_range(0..=3);
        let business = if self.rng.random_bool(0.05) { 1 } else { 2 };
        let raw = vec![code(serial as i64, 7), code(ten, 1), code(bld, 2), code(vehicles, 1), code(business, 1)];
        self.emit(RecordKind::Household, raw);
    }

    fn adult_line(&mut self, serial: usize, relationship: i64, sex: i64, a: &Adult) {
        let race = self.rng.random_range(1..=9);
        let ancestry = ANCESTRY[self.rng.random_range(0..ANCESTRY.len())];
        let cow = self.rng.random_range(1..=8);
        let disabled = if self.rng.random_bool(0.04) { 1 } else { 2 };
        let raw = vec![
            code(serial as i64, 7),
            code(relationship, 2),
            code(sex, 1),
            code(a.age, 2),
            code(1, 1),
            code(race, 1),
            code(ancestry, 3),
            code(a.education, 2),
            code(cow, 1),
            code(a.income, 7),
            code(disabled, 1),
        ];
        self.emit(RecordKind::Person, raw);
    }

    fn child_line(&mut self, serial: usize, age: i64) {
        let sex = self.rng.random_range(1..=2);
        let race = self.rng.random_range(1..=9);
        let ancestry = ANCESTRY[self.rng.random_range(0..ANCESTRY.len())];
        let education = if age < 3 { 0 } else { (age - 2).clamp(1, 9) };
        let raw = vec![
            code(serial as i64, 7),
            code(3, 2),
            code(sex, 1),
            code(age, 2),
            code(5, 1),
            code(race, 1),
            code(ancestry, 3),
            code(education, 2),
            code(0, 1),
            blank(7),
            code(2, 1),
        ];
        self.emit(RecordKind::Person, raw);
    }

    fn spread_adult(&mut self, age: i64) -> Adult {
        let income = normal(&mut self.rng, (40_000.0, 20_000.0)).clamp(-10_000.0, 720_000.0);
        Adult {
            age,
            education: self.rng.random_range(8..=16),
            income: (income / 100.0).round() as i64 * 100,
        }
    }

    fn couple(&mut self, serial: usize, father: &Adult, mother: &Adult) {
        if self.rng.random_bool(0.2) {
            self.adult_line(serial, 1, 2, mother);
            self.adult_line(serial, 2, 1, father);
        } else {
            self.adult_line(serial, 1, 1, father);
            self.adult_line(serial, 2, 2, mother);
        }
    }

    fn spread_couple(&mut self, serial: usize, lo: i64, hi: i64) {
        let fa = self.rng.random_range(lo..=hi);
        let ma = (fa - self.rng.random_range(0..=4)).max(18);
        let father = self.spread_adult(fa);
        let mother = self.spread_adult(ma);
        self.couple(serial, &father, &mother);
    }

    fn household(&mut self, serial: usize, kind: Kind) {
        match kind {
            Kind::Infant(b) => {
                let blob = BLOBS[b];
                self.household_line(serial, &blob.tenure, &blob.building);
                let father = Adult {
                    age: normal(&mut self.rng, blob.father_age).round() as i64,
                    education: normal(&mut self.rng, blob.father_education).round().clamp(1.0, 16.0) as i64,
                    income: (normal(&mut self.rng, blob.father_income) / 100.0).round() as i64 * 100,
                };
                let mother = Adult {
                    age: normal(&mut self.rng, blob.mother_age).round() as i64,
                    education: normal(&mut self.rng, blob.mother_education).round().clamp(1.0, 16.0) as i64,
                    income: (normal(&mut self.rng, (20_000.0, 8_000.0)) / 100.0).round() as i64 * 100,
                };
                self.couple(serial, &father, &mother);
                let children = self.rng.random_range(1..=2);
                for _ in 0..children {
                    let age = self.rng.random_range(0..=2);
                    self.child_line(serial, age);
                }
            }
            Kind::Childless => {
                self.household_line(serial, &CHILDLESS_TENURE, &CHILDLESS_BUILDING);
                self.spread_couple(serial, 20, 45);
            }
            Kind::OlderChildren => {
                self.household_line(serial, &BLOBS[2].tenure, &BLOBS[2].building);
                self.spread_couple(serial, 30, 50);
                let children = self.rng.random_range(1..=3);
                for _ in 0..children {
                    let age = self.rng.random_range(3..=17);
                    self.child_line(serial, age);
                }
            }
            Kind::SingleParent => {
                self.household_line(serial, &CHILDLESS_TENURE, &CHILDLESS_BUILDING);
                let age = self.rng.random_range(20..=60);
                let adult = self.spread_adult(age);
                let sex = self.rng.random_range(1..=2);
                self.adult_line(serial, 1, sex, &adult);
                let children = self.rng.random_range(0..=2);
                for _ in 0..children {
                    let age = self.rng.random_range(0..=17);
                    self.child_line(serial, age);
                }
            }
            Kind::Extended => {
                self.household_line(serial, &CHILDLESS_TENURE, &CHILDLESS_BUILDING);
                self.spread_couple(serial, 20, 45);
                let age = self.rng.random_range(50..=75);
                let relative = self.spread_adult(age);
                let sex = self.rng.random_range(1..=2);
                self.adult_line(serial, 15, sex, &relative);
            }
        }
    }

    fn random_kind(&mut self) -> Kind {
        match pick(&mut self.rng, &[0.38, 0.35, 0.15, 0.08, 0.04]) {
            0 => {
                let weights: Vec<f64> = BLOBS.iter().map(|b| b.weight).collect();
                Kind::Infant(pick(&mut self.rng, &weights))
            }
            1 => Kind::Childless,
            2 => Kind::OlderChildren,
            3 => Kind::SingleParent,
            _ => Kind::Extended,
        }
    }
}

/// Fixed-width microdata text for `params.households` households.
pub fn generate_microdata(params: &SynthParams) -> String {
    let mut g = Generator::new(params.seed);
    for serial in 1..=params.households {
        let kind = g.random_kind();
        g.household(serial, kind);
    }
    g.out
}

/// Infant families only, `per_blob` from each planted blob in turn. Returns
/// the families and the blob index of each.
pub fn planted_infant_families(seed: u64, per_blob: usize) -> (Vec<FamilyUnit>, Vec<usize>) {
    let mut g = Generator::new(seed);
    let mut labels = Vec::with_capacity(per_blob * BLOBS.len());
    for b in 0..BLOBS.len() {
        for _ in 0..per_blob {
            labels.push(b);
            g.household(labels.len(), Kind::Infant(b));
        }
    }
    let data = parse_microdata(g.out.as_bytes(), &g.schema).expect("generated data parses");
    let families = derive_families(data, &g.schema.relationship);
    assert_eq!(families.len(), labels.len());
    (families, labels)
}

/// Parsed and linked families of a generated file.
pub fn generate_families(params: &SynthParams) -> Vec<FamilyUnit> {
    let schema = synthetic_schema();
    let text = generate_microdata(params);
    let data = parse_microdata(text.as_bytes(), &schema).expect("generated data parses");
    derive_families(data, &schema.relationship)
}

pub const MICRODATA_FILE: &str = "microdata.dat";
pub const SCHEMA_FILE: &str = "schema.toml";
pub const CONFIG_FILE: &str = "influence.toml";

/// Pipeline config for a generated fixture. The favorable-window threshold
/// scales with the number of households.
pub fn fixture_config(dir: &Path, params: &SynthParams) -> PipelineConfig {
    let mut config = PipelineConfig::new(dir.join(SCHEMA_FILE), vec![dir.join(MICRODATA_FILE)]);
    let expected_infant_families = params.households as f64 * 0.38;
    config.cohort.age_window = AgeWindow::Auto {
        threshold: ((expected_infant_families * 0.01).round() as usize).max(1),
    };
    config.report.output_dir = dir.join("report");
    config
}

/// Contents of the files written by [`write_fixture`], in write order.
pub fn fixture_files(dir: &Path, params: &SynthParams) -> Vec<(&'static str, String)> {
    let config = fixture_config(dir, params);
    let header = format!(
        "# Synthetic fixture: seed {}, {} households.\n# Paths are relative to the working directory the generator ran in.\n\n",
        params.seed, params.households
    );
    vec![
        (MICRODATA_FILE, generate_microdata(params)),
        (SCHEMA_FILE, SYNTHETIC_SCHEMA.to_string()),
        (CONFIG_FILE, header + &config.to_toml()),
    ]
}

/// Writes microdata, schema and a ready-to-run pipeline config into `dir`.
pub fn write_fixture(dir: &Path, params: &SynthParams) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    fixture_files(dir, params)
        .into_iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
