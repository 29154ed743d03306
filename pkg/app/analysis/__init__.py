from .experiments import (
    analytic_detection,
    analytic_guess,
    detection_experiment,
    guess_experiment,
)
from .montecarlo import MonteCarloRunner, run_with_rerun
from .reports import format_report_text, parse_report, reports_to_csv, to_json
from .verification import (
    TRUTH_TABLE,
    efficiency_tradeoff,
    exhaustive_correctness,
    qubit_efficiency,
    verify_truth_table,
)
