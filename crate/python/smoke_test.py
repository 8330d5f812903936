"""Smoke test for the `influence` Python extension.

Build and install first:

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/influence-*.whl
    python python/smoke_test.py
"""

import math
import tempfile
from pathlib import Path

import influence


def check_clustering():
    pts = [[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [5.0, 5.0], [5.1, 5.0], [5.0, 5.1]]
    scaled, bounds = influence.normalize(pts)
    assert bounds == [(0.0, 5.1), (0.0, 5.1)]
    assert all(0.0 <= v <= 1.0 for row in scaled for v in row)

    params = influence.ClusterParams(cluster_radius=0.5)
    pot = influence.initial_potentials(scaled, params)
    naive = [
        sum(math.exp(-sum((a - b) ** 2 for a, b in zip(x, y)) / 0.25**2) for y in scaled)
        for x in scaled
    ]
    assert all(abs(p - q) < 1e-9 for p, q in zip(pot, naive))

    best = max(range(len(pot)), key=lambda i: (pot[i], -i))
    after = influence.subtract_center(pot, scaled, best, params)
    assert after[best] == 0.0
    assert all(a <= p for a, p in zip(after, pot))

    centers = influence.select_centers(scaled, params)
    assert len(centers) == 2, centers
    model = influence.fit(pts, params)
    assert model.n_clusters == 2
    assert sorted(model.sizes()) == [3, 3]
    assert model.assignment[:3] == [model.assignment[0]] * 3
    assert influence.assign(scaled, model.centers) == model.assignment

    try:
        influence.ClusterParams(cluster_radius=0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("radius 0 accepted")


def check_tables():
    assert influence.income_bin(50_000) == 5
    assert influence.income_bin(0) == 2
    assert influence.income_bin(720_000) == 11
    assert influence.income_bin_label(5) == "[4; 6)"
    assert influence.education_label(13) == "Bachelor's degree"
    for code in range(1, 17):
        assert influence.education_code(influence.education_label(code)) == code
    assert influence.range_from_counts({28: 10, 29: 8, 30: 7, 31: 3}, 0.8) == (28, 29)
    assert influence.window_from_counts({30: 500, 31: 450, 32: 390, 33: 410}, 400) == (30, 33)
    assert abs(influence.total_variation([2, 1], [1, 2]) - 1 / 3) < 1e-12
    assert influence.total_variation([0, 0], [1, 2]) is None


def check_pipeline():
    with tempfile.TemporaryDirectory() as tmp:
        fixture = Path(tmp) / "fx"
        paths = influence.synth(str(fixture), seed=2000, households=2000)
        assert [Path(p).name for p in paths] == ["microdata.dat", "schema.toml", "influence.toml"]
        assert influence.generate_microdata(7, 50) == influence.generate_microdata(7, 50)
        out = influence.run_pipeline(str(fixture / "influence.toml"), out_dir=str(fixture / "report"))
        assert len(out["sizes"]) == 3, out["sizes"]
        ages = sorted(round(c[0]) for c in out["centers"])
        assert ages == [26, 32, 38], ages
        assert (fixture / "report" / "manifest.json").is_file()


if __name__ == "__main__":
    check_clustering()
    check_tables()
    check_pipeline()
    print(f"influence {influence.__version__}: smoke test passed")
