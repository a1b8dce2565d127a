"""Rewrite the committed fixtures and golden CLI outputs.

Run from the repository root:  python3 tests/fixtures/regenerate.py
The tests check that regeneration reproduces the committed bytes.
"""
import contextlib
import io
import json
from pathlib import Path

from regdepth.cli import main
from regdepth.core import Dataset, dataset_to_csv, four_point_dataset
from regdepth.sim import gen_contaminated, gen_std_normal

HERE = Path(__file__).resolve().parent

GENERATED = {
    "gauss_p2_n20.csv": ("std_normal", 2, 20, 20),
    "gauss_p2_n50.csv": ("std_normal", 2, 50, 50),
    "gauss_p3_n30.csv": ("std_normal", 3, 30, 30),
    "gauss_p5_n200.csv": ("std_normal", 5, 200, 200),
    "contaminated_p3_n20.csv": ("diag_normal_contaminated", 3, 20, 21),
}

# (output name, argv with {f} standing for the fixture directory)
GOLDEN = {
    "depth_four_point.json": ["depth", "--input", "{f}/four_point.csv", "--beta", "0,1"],
    "depth_gauss_p2_n20.json": ["depth", "--input", "{f}/gauss_p2_n20.csv", "--beta", "0.1,-0.2"],
    "depth_gauss_p3_n30.json": ["depth", "--input", "{f}/gauss_p3_n30.csv",
                                "--beta", "0.1,0.2,-0.3"],
    "median_four_point.json": ["median", "--input", "{f}/four_point.csv"],
    "median_collinear.json": ["median", "--input", "{f}/collinear.csv"],
    "median_gauss_p2_n20.json": ["median", "--input", "{f}/gauss_p2_n20.csv"],
    "median_gauss_p3_n30.json": ["median", "--input", "{f}/gauss_p3_n30.csv", "--no-witnesses"],
    "bounds_four_point.json": ["bounds", "--input", "{f}/four_point.csv"],
    "bounds_gauss_p3_n30.json": ["bounds", "--input", "{f}/gauss_p3_n30.csv"],
}


def generated_csv(name: str) -> str:
    gen, p, n, seed = GENERATED[name]
    f = gen_std_normal if gen == "std_normal" else gen_contaminated
    return dataset_to_csv(f(p, n, seed))


def static_csv(name: str) -> str:
    if name == "four_point.csv":
        return dataset_to_csv(four_point_dataset())
    if name == "collinear.csv":
        return dataset_to_csv(Dataset.from_points([[x, 1 + 2 * x] for x in range(5)]))
    raise KeyError(name)


def run_cli(argv, fixture_dir=HERE) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main([a.replace("{f}", str(fixture_dir)) for a in argv])
    return code, buf.getvalue()


def main_regenerate():
    for name in ("four_point.csv", "collinear.csv"):
        (HERE / name).write_text(static_csv(name), encoding="utf-8")
    for name in GENERATED:
        (HERE / name).write_text(generated_csv(name), encoding="utf-8")
    for name, argv in GOLDEN.items():
        code, out = run_cli(argv)
        assert code == 0, (name, code)
        (HERE / "golden" / name).write_text(out, encoding="utf-8")
    (HERE / "manifest.json").write_text(json.dumps(
        {"generated": GENERATED, "golden": GOLDEN}, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main_regenerate()
