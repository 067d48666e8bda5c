"""CLI runs whose outputs are frozen under tests/golden.

Regenerate after an intended output change with
``python3 tests/cli_cases.py --regenerate``.
"""
import shutil
import sys
import tempfile
from pathlib import Path

from topokit.cli import main
from topokit.formats import read_problem
from topokit.optimizer import estimate_constants

HERE = Path(__file__).parent
FIXTURES, GOLDEN = HERE / "fixtures", HERE / "golden"


def _negative_eta():
    problem, _ = read_problem(FIXTURES / "cycle.json")
    return repr(100 / (2 * estimate_constants(problem, 1.0).C2))


# name -> (argv with {f} for the fixture dir and {o} for the output dir, outputs, exit code)
CASES = {
    "ph_square": (["ph", "{f}/square4.xyz", "--out", "{o}/square.csv", "--svg", "{o}/square.svg"],
                  ["square.csv", "square.svg"], 0),
    "ph_tetra": (["ph", "{f}/tetra.ply", "--out", "{o}/tetra.csv"], ["tetra.csv"], 0),
    "lpvi_grid": (["lpvi", "{f}/grid100.xyz", "--out", "{o}/grid_aug.xyz", "--report",
                   "{o}/grid_report.csv", "--neighborhoods", "{o}/grid_nb.csv"],
                  ["grid_aug.xyz", "grid_report.csv", "grid_nb.csv"], 0),
    "lpvi_sphere": (["lpvi", "{f}/sphere200.xyz", "--k", "16", "--k-prime", "8", "--tau", "0.5",
                     "--out", "{o}/sphere_aug.xyz", "--report", "{o}/sphere_report.csv"],
                    ["sphere_aug.xyz", "sphere_report.csv"], 0),
    "persloss_fixture": (["persloss", "{f}/rendered.ppm", "{f}/gt.ppm", "--k0", "1", "--k1", "1",
                          "--k2", "0", "--out", "{o}/persloss.json", "--gradient",
                          "{o}/persloss_grad.csv"], ["persloss.json", "persloss_grad.csv"], 0),
    "persloss_identity": (["persloss", "{f}/gt.ppm", "{f}/gt.ppm", "--out", "{o}/identity.json"],
                          ["identity.json"], 0),
    "optimize_converged": (["optimize", "{f}/converged.json", "--trace", "{o}/converged.csv"],
                           ["converged.csv"], 0),
    "optimize_cycle": (["optimize", "{f}/cycle.json", "--lambda", "1.0", "--epsilon", "0.01",
                        "--eta", "auto", "--persloss-period", "1", "--trace", "{o}/cycle.csv",
                        "--svg", "{o}/cycle.svg"], ["cycle.csv", "cycle.svg"], 0),
    "optimize_supervised": (["optimize", "{f}/cycle_supervised.json", "--lambda", "0.05",
                             "--persloss-period", "1", "--trace", "{o}/supervised.csv", "--svg",
                             "{o}/supervised.svg"], ["supervised.csv", "supervised.svg"], 0),
    "optimize_negative": (["optimize", "{f}/cycle.json", "--eta", _negative_eta(),
                           "--persloss-period", "1", "--trace", "{o}/negative.csv"],
                          ["negative.csv"], 6),
}


def run_case(name, outdir):
    argv, outputs, _ = CASES[name]
    code = main([a.format(f=FIXTURES, o=outdir) for a in argv])
    return code, {o: (Path(outdir) / o).read_bytes() for o in outputs}


def regenerate():
    GOLDEN.mkdir(exist_ok=True)
    for name, (_, _, expected) in CASES.items():
        with tempfile.TemporaryDirectory() as tmp:
            code, files = run_case(name, tmp)
            assert code == expected, (name, code)
            for fname in files:
                shutil.copy(Path(tmp) / fname, GOLDEN / fname)


if __name__ == "__main__" and "--regenerate" in sys.argv:
    regenerate()
