import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import InvalidArgumentError
from ..models.schemas import ExperimentReport

logger = logging.getLogger(__name__)


def _run_trial(
    trial_fn: Callable[..., Any],
    args: Tuple[Any, ...],
    kwargs: Dict[str, Any],
    seed: np.random.SeedSequence,
) -> Any:
    return trial_fn(np.random.default_rng(seed), *args, **kwargs)


class MonteCarloRunner:
    """Runs independent trials, each on its own stream spawned from the master seed

    Per-trial seeds do not depend on the worker count, so results are identical
    for any `jobs`.
    """

    def __init__(self, trials: int, seed: int, jobs: Optional[int] = None):
        if trials < settings.min_trials:
            raise InvalidArgumentError(
                f"At least {settings.min_trials} trials are required, got {trials}"
            )
        self.trials = trials
        self.seed = seed
        self.jobs = max(1, jobs or settings.default_jobs)

    def seeds(self) -> List[np.random.SeedSequence]:
        return np.random.SeedSequence(self.seed).spawn(self.trials)

    def run(self, trial_fn: Callable[..., Any], *args: Any, **kwargs: Any) -> List[Any]:
        """Call trial_fn(rng, *args, **kwargs) once per trial; trial_fn must be picklable"""
        task = partial(_run_trial, trial_fn, args, kwargs)
        seeds = self.seeds()
        if self.jobs == 1:
            return [task(seed) for seed in seeds]
        chunksize = max(1, self.trials // (self.jobs * 4))
        logger.debug(f"Running {self.trials} trials on {self.jobs} workers")
        with ProcessPoolExecutor(max_workers=self.jobs) as executor:
            return list(executor.map(task, seeds, chunksize=chunksize))

    def count(self, trial_fn: Callable[..., bool], *args: Any, **kwargs: Any) -> int:
        return sum(bool(hit) for hit in self.run(trial_fn, *args, **kwargs))


def run_with_rerun(
    experiment: Callable[[int], ExperimentReport], seed: int
) -> ExperimentReport:
    """Run once; on a failed analytic check run once more on the next seed"""
    report = experiment(seed)
    if report.passed:
        return report
    logger.warning(
        f"{report.name}: estimate {report.estimate:.4f} outside band of "
        f"{report.analytic}, re-running"
    )
    rerun = experiment(seed + 1)
    return rerun.model_copy(update={"details": {**rerun.details, "rerun": True}})
