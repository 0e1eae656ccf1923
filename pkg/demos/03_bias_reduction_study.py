"""Small Monte Carlo study: raw against bootstrap bias-reduced estimates.

For the full-size study run ``wexfam simulate --config demos/full_scale.json``.
"""
import json
from pathlib import Path

from wexfam.mcstudy import StudyConfig, default_threads, run_study
from wexfam.report import write_study_charts

cfg = StudyConfig.from_dict(json.loads((Path(__file__).parent / "desk_scale.json").read_text()))
report = run_study(cfg, parallelism=default_threads())

for r in report.rows:
    print(f"n={r.n:5d} phi={r.true_first:g} {r.parameter:7s} "
          f"RB {r.raw_rb:.4f} -> {r.corrected_rb:.4f}  RMSE {r.raw_rmse:.4f} -> {r.corrected_rmse:.4f}")

write_study_charts(report, Path("study_charts"))
