//! Report directories: delimited tables, a plain-text summary and a
//! [`RunManifest`] listing the digest of every file written.
//!
//! Every table is comma-separated with a header row. Floating-point cells
//! use Rust's shortest round-trip formatting, so re-parsing a table gives
//! back the exact `f64` values. Only `summary.txt` rounds percentages.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{ClusterModel, Dataset};
use crate::error::{Error, Result};
use crate::search::pipeline::{PipelineConfig, PipelineOutcome};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_NAME: &str = "influence";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the output directory for outputs; as given for inputs.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub steps: Vec<StepRecord>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            config,
            inputs: Vec::new(),
            steps: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Records the digest of each input file.
    pub fn add_inputs<'a>(&mut self, paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
        for p in paths {
            let (bytes, sha256) = digest_file(p)?;
            self.inputs.push(FileDigest {
                path: display_path(p),
                bytes,
                sha256,
            });
        }
        Ok(())
    }
}

fn display_path(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
        .replace("//", "/")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Size and SHA-256 of a file, read in chunks.
pub fn digest_file(path: &Path) -> Result<(u64, String)> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((total, hex::encode(hasher.finalize())))
}

/// Files staged in memory, written together with their manifest.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stages a file; `name` uses `/` separators and is relative to the output directory.
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file and `manifest.json` under `dir`, then re-reads the
    /// outputs and checks them against the manifest.
    pub fn write(self, dir: &Path, mut manifest: RunManifest) -> Result<RunManifest> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        manifest.outputs.clear();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            manifest.outputs.push(FileDigest {
                path: name.clone(),
                bytes: contents.len() as u64,
                sha256: sha256_hex(contents),
            });
        }
        let manifest_path = dir.join(MANIFEST_FILE);
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        std::fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
        verify_outputs(dir)?;
        Ok(manifest)
    }
}

/// Re-reads `dir/manifest.json` and every output it lists, failing on the
/// first size or digest mismatch.
pub fn verify_outputs(dir: &Path) -> Result<RunManifest> {
    let manifest = RunManifest::load(&dir.join(MANIFEST_FILE))?;
    for out in &manifest.outputs {
        let path = dir.join(&out.path);
        match digest_file(&path) {
            Ok((bytes, sha)) if bytes == out.bytes && sha == out.sha256 => {}
            _ => return Err(Error::Verify(path)),
        }
    }
    Ok(manifest)
}

/// CSV text built row by row.
struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header.iter().map(AsRef::as_ref)).expect("in-memory write");
        Self { writer }
    }

    fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        self.writer.write_record(cells.iter().map(AsRef::as_ref)).expect("in-memory write");
    }

    fn finish(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Reads a CSV table of numeric columns with a header row.
pub fn read_numeric_table(path: &Path) -> Result<(Vec<String>, Dataset)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let parse_err = |line: usize, message: String| Error::Parse {
        line,
        message: format!("{}: {message}", path.display()),
    };
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(parse_err(1, "missing header row".into()));
    }
    let mut values = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(parse_err(line, format!("expected {} columns, found {}", headers.len(), record.len())));
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("column `{}`: `{cell}` is not a number", headers[c])))?;
            values.push(v);
        }
    }
    let dataset = Dataset::from_flat(headers.len(), values).map_err(|e| match e {
        Error::NonFinite { point, dim } => parse_err(point + 2, format!("column `{}` is not finite", headers[dim])),
        other => other,
    })?;
    Ok((headers, dataset))
}

/// `centers.csv` (original units) and `assignments.csv` for a standalone clustering run.
pub fn cluster_outputs(headers: &[String], model: &ClusterModel) -> OutputSet {
    let mut out = OutputSet::new();
    let sizes = model.sizes();
    let mut header = vec!["cluster".to_string(), "row".to_string(), "size".to_string()];
    header.extend(headers.iter().cloned());
    let mut t = Table::new(&header);
    for (k, center) in model.centers_original.iter().enumerate() {
        let mut row = vec![(k + 1).to_string(), model.center_indices[k].to_string(), sizes[k].to_string()];
        row.extend(center.iter().map(f64::to_string));
        t.row(&row);
    }
    out.add("centers.csv", t.finish());
    let mut t = Table::new(&["row", "cluster"]);
    for (i, &k) in model.assignment.iter().enumerate() {
        t.row(&[i.to_string(), (k + 1).to_string()]);
    }
    out.add("assignments.csv", t.finish());
    out
}

/// Options for [`influence_outputs`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Store step durations in the manifest. Off by default so that repeated
    /// runs produce identical bytes.
    pub record_timings: bool,
}

/// All report tables and the summary for one pipeline run. Cluster numbers
/// in the files start at 1.
pub fn influence_outputs(config: &PipelineConfig, outcome: &PipelineOutcome) -> OutputSet {
    let mut out = OutputSet::new();
    let families = &outcome.families;
    let features = &config.features.clustering;
    let clusters = &outcome.clusters;
    let sizes = clusters.sizes();
    let pct = clusters.percentages();

    let mut t = Table::new(&["quantity", "value"]);
    let mut kv = |k: &str, v: String| t.row(&[k, v.as_str()]);
    kv("families", families.len().to_string());
    kv("n1", outcome.cohorts.n1.len().to_string());
    kv("n2", outcome.cohorts.n2.len().to_string());
    kv("n1_dropped_missing_features", outcome.dropped_missing_features.to_string());
    kv("n1_clustered", clusters.rows.len().to_string());
    if let Some(w) = &outcome.window {
        kv("father_age_lo", w.father.lo.to_string());
        kv("father_age_hi", w.father.hi.to_string());
        kv("mother_age_lo", w.mother.lo.to_string());
        kv("mother_age_hi", w.mother.hi.to_string());
    }
    kv("clusters", sizes.len().to_string());
    out.add("cohort_summary.csv", t.finish());

    if let Some(w) = &outcome.window {
        let mut t = Table::new(&["parent", "age", "count"]);
        for (parent, counts) in [("father", &w.father_counts), ("mother", &w.mother_counts)] {
            for (age, count) in counts {
                t.row(&[parent.to_string(), age.to_string(), count.to_string()]);
            }
        }
        out.add("window_counts.csv", t.finish());
    }

    let feature_names: Vec<&str> = features.iter().map(|a| a.name()).collect();
    let mut header = vec!["cluster"];
    header.extend(&feature_names);
    header.extend(["size", "percent"]);
    let mut t = Table::new(&header);
    let mut full = {
        let mut h = vec!["cluster", "center_family"];
        h.extend(&feature_names);
        Table::new(&h)
    };
    for (k, center) in clusters.model.centers_original.iter().enumerate() {
        let mut row = vec![(k + 1).to_string()];
        row.extend(features.iter().zip(center).map(|(a, &v)| a.display_center(v)));
        row.extend([sizes[k].to_string(), format!("{:.2}", pct[k])]);
        t.row(&row);
        let mut row = vec![(k + 1).to_string(), clusters.rows[clusters.model.center_indices[k]].to_string()];
        row.extend(center.iter().map(f64::to_string));
        full.row(&row);
    }
    out.add("centers.csv", t.finish());
    out.add("centers_full.csv", full.finish());

    let mut t = Table::new(&["cluster", "size", "percent"]);
    for k in 0..sizes.len() {
        t.row(&[(k + 1).to_string(), sizes[k].to_string(), pct[k].to_string()]);
    }
    out.add("memberships.csv", t.finish());

    let mut t = Table::new(&["family", "household", "cluster"]);
    let mut by_family: Vec<(usize, usize)> = clusters
        .rows
        .iter()
        .zip(&clusters.model.assignment)
        .map(|(&f, &k)| (f, k))
        .collect();
    by_family.sort_unstable();
    for (f, k) in by_family {
        t.row(&[f.to_string(), families[f].id().to_string(), (k + 1).to_string()]);
    }
    out.add("assignments.csv", t.finish());

    let ranges = &outcome.ranges;
    let mut series = Table::new(&["cluster", "attribute", "value", "count", "in_range"]);
    let mut rt = Table::new(&["cluster", "attribute", "lo", "hi", "fraction"]);
    for k in 0..ranges.n_clusters() {
        for (a, attr) in ranges.attributes.iter().enumerate() {
            let r = ranges.ranges[k][a];
            for (v, c) in &ranges.series[k][a] {
                series.row(&[
                    (k + 1).to_string(),
                    attr.name().to_string(),
                    v.to_string(),
                    c.to_string(),
                    u8::from(r.contains(*v)).to_string(),
                ]);
            }
            rt.row(&[
                (k + 1).to_string(),
                attr.name().to_string(),
                r.lo.to_string(),
                r.hi.to_string(),
                ranges.fraction.to_string(),
            ]);
        }
    }
    out.add("age_series.csv", series.finish());
    out.add("ranges.csv", rt.finish());

    let mut t = Table::new(&["cluster", "cluster_size", "prototype_size"]);
    for (k, m) in outcome.prototypes.members.iter().enumerate() {
        t.row(&[(k + 1).to_string(), sizes[k].to_string(), m.len().to_string()]);
    }
    out.add("prototypes.csv", t.finish());

    let multiplicity = outcome.prototypes.multiplicity(&outcome.cohorts.n2);
    let mut t = Table::new(&["prototypes_containing", "families"]);
    for (m, n) in &multiplicity {
        t.row(&[m.to_string(), n.to_string()]);
    }
    out.add("prototype_overlap.csv", t.finish());

    let mut long = Table::new(&[
        "cluster",
        "attribute",
        "bin",
        "cluster_count",
        "prototype_count",
        "cluster_pct",
        "prototype_pct",
    ]);
    let mut div = Table::new(&[
        "cluster",
        "attribute",
        "cluster_n",
        "prototype_n",
        "cluster_excluded",
        "prototype_excluded",
        "divergence",
        "flagged",
    ]);
    for e in &outcome.report.entries {
        let k = (e.cluster + 1).to_string();
        let mut plot = Table::new(&["bin", "cluster_pct", "prototype_pct"]);
        for b in 0..e.bin_labels.len() {
            let (cp, pp) = (e.cluster_pct[b].to_string(), e.prototype_pct[b].to_string());
            plot.row(&[e.bin_labels[b].as_str(), &cp, &pp]);
            long.row(&[
                k.clone(),
                e.attribute.name().to_string(),
                e.bin_labels[b].clone(),
                e.cluster_hist.counts[b].to_string(),
                e.prototype_hist.counts[b].to_string(),
                cp,
                pp,
            ]);
        }
        out.add(format!("histograms/cluster_{k}_{}.csv", e.attribute.name()), plot.finish());
        div.row(&[
            k,
            e.attribute.name().to_string(),
            e.cluster_hist.total().to_string(),
            e.prototype_hist.total().to_string(),
            e.cluster_hist.excluded.to_string(),
            e.prototype_hist.excluded.to_string(),
            opt_f64(e.divergence),
            u8::from(e.flagged).to_string(),
        ]);
    }
    out.add("histograms.csv", long.finish());
    out.add("divergence.csv", div.finish());

    out.add("summary.txt", summary_text(config, outcome, &multiplicity));
    out
}

fn summary_text(config: &PipelineConfig, outcome: &PipelineOutcome, multiplicity: &BTreeMap<usize, usize>) -> String {
    let mut s = String::new();
    let clusters = &outcome.clusters;
    let sizes = clusters.sizes();
    let pct = clusters.percentages();
    let _ = writeln!(s, "{TOOL_NAME} {TOOL_VERSION}\n");
    let _ = writeln!(s, "Families: {}", outcome.families.len());
    if let Some(w) = &outcome.window {
        let _ = writeln!(s, "Father age window: {}", w.father);
        let _ = writeln!(s, "Mother age window: {}", w.mother);
    }
    let _ = writeln!(s, "N1 (feature present): {}", outcome.cohorts.n1.len());
    if outcome.dropped_missing_features > 0 {
        let _ = writeln!(s, "  dropped for missing features: {}", outcome.dropped_missing_features);
    }
    let _ = writeln!(s, "N2 (feature absent): {}", outcome.cohorts.n2.len());

    let _ = writeln!(s, "\nCluster centers (r_a = {}):", config.clustering.cluster_radius);
    let names: Vec<&str> = config.features.clustering.iter().map(|a| a.name()).collect();
    let _ = writeln!(s, "  cluster  {}  size  percent", names.join("  "));
    for (k, center) in clusters.model.centers_original.iter().enumerate() {
        let cells: Vec<String> = config
            .features
            .clustering
            .iter()
            .zip(center)
            .zip(&names)
            .map(|((a, &v), n)| format!("{:>w$}", a.display_center(v), w = n.len()))
            .collect();
        let _ = writeln!(s, "  {:>7}  {}  {:>4}  {:>6.2}%", k + 1, cells.join("  "), sizes[k], pct[k]);
    }

    let _ = writeln!(s, "\nInvariant ranges ({}% of max) and prototypes:", outcome.ranges.fraction * 100.0);
    for k in 0..outcome.ranges.n_clusters() {
        let ranges: Vec<String> = outcome
            .ranges
            .attributes
            .iter()
            .zip(&outcome.ranges.ranges[k])
            .map(|(a, r)| format!("{a} {r}"))
            .collect();
        let _ = writeln!(
            s,
            "  cluster {}: {}; prototype size {}",
            k + 1,
            ranges.join(", "),
            outcome.prototypes.members[k].len()
        );
    }
    let overlap: Vec<String> = multiplicity.iter().map(|(m, n)| format!("{n} in {m}")).collect();
    let _ = writeln!(s, "  N2 families by number of prototypes: {}", overlap.join(", "));

    let report = &outcome.report;
    let _ = writeln!(s, "\nDistribution comparisons (total variation, flag above {}):", report.threshold);
    for e in &report.entries {
        let d = e.divergence.map_or_else(|| "n/a".to_string(), |d| format!("{d:.4}"));
        let flag = if e.flagged { "  *" } else { "" };
        let _ = writeln!(s, "  cluster {} {:<24} {d}{flag}", e.cluster + 1, e.attribute.name());
    }
    let _ = writeln!(s, "\nFlagged: {}", report.flagged().count());
    s
}

/// Writes the full report for a pipeline run into `dir` and verifies it.
pub fn write_influence_report(
    dir: &Path,
    config: &PipelineConfig,
    outcome: &PipelineOutcome,
    options: ReportOptions,
) -> Result<RunManifest> {
    let mut manifest = RunManifest::new(
        "influence",
        serde_json::to_value(config).expect("config serializes"),
    );
    let inputs: Vec<PathBuf> = std::iter::once(config.input.schema.clone())
        .chain(config.input.files.iter().cloned())
        .collect();
    manifest.add_inputs(inputs.iter().map(PathBuf::as_path))?;
    manifest.steps = outcome
        .timings
        .iter()
        .map(|(name, d)| StepRecord {
            name: (*name).to_string(),
            seconds: options.record_timings.then(|| d.as_secs_f64()),
        })
        .collect();
    influence_outputs(config, outcome).write(dir, manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "x, y\n0.1,2\n-3e-7, 4.5\n").unwrap();
        let (h, d) = read_numeric_table(&p).unwrap();
        assert_eq!(h, vec!["x", "y"]);
        assert_eq!(d.point(1), &[-3e-7, 4.5]);
    }

    #[test]
    fn numeric_table_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "x,y\n1,2\n3,abc\n").unwrap();
        let err = read_numeric_table(&p).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        std::fs::write(&p, "x,y\n").unwrap();
        assert!(matches!(read_numeric_table(&p), Err(Error::EmptyDataset)));
    }

    #[test]
    fn written_outputs_verify_and_tampering_is_caught() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::new();
        out.add("a.csv", "x\n1\n");
        out.add("sub/b.txt", "hello\n");
        let m = out.write(dir.path(), RunManifest::new("test", serde_json::Value::Null)).unwrap();
        assert_eq!(m.outputs.len(), 2);
        assert_eq!(m.outputs[1].path, "sub/b.txt");
        assert_eq!(m.outputs[1].sha256, sha256_hex(b"hello\n"));
        std::fs::write(dir.path().join("a.csv"), "x\n2\n").unwrap();
        assert!(matches!(verify_outputs(dir.path()), Err(Error::Verify(_))));
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
