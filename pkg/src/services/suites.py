"""Verification suite runner - fans suites out over worker threads."""

import asyncio
import time
from collections.abc import Callable, Sequence
from functools import partial

import numpy as np
from loguru import logger

from src.config import Settings, get_settings
from src.errors import ParameterDomainError
from src.measures.alpha import alpha_suite
from src.measures.axioms import verify_axioms
from src.measures.bounds import bounds_suite
from src.measures.core import special_case_suite
from src.measures.majorization import SCHUR_BETAS, schur_concavity_suite
from src.models.allocation import AllocationVector
from src.models.report import SuiteReport
from src.models.tradeoff import SolverOptions
from src.services.solver import solver_suite
from src.utils.sampling import sample_allocation

SUITES = ("core", "axioms", "schur", "alpha", "bounds", "solver")
AXIOM_BETAS = (-4.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0)

Job = Callable[[], SuiteReport]


class SuiteRunner:
    """Runs verification suites concurrently and merges their reports."""

    def __init__(self, settings: Settings | None = None) -> None:
        """Initialize the runner.

        Args:
            settings: Application settings; FAIRMETRIC_THREADS caps parallelism.
        """
        self._settings = settings or get_settings()

    def _axiom_samples(self, seed: int) -> list[AllocationVector]:
        rng = np.random.default_rng(seed)
        return [
            AllocationVector.of(sample_allocation(rng, int(rng.integers(1, 9)), zero_prob=0.1))
            for _ in range(self._settings.axiom_samples)
        ]

    def jobs(self, suite: str, seed: int, tol: float) -> list[tuple[str, Job]]:
        """Independent units of work for one suite."""
        settings = self._settings
        if suite == "core":
            return [("core", partial(special_case_suite, trials=100, seed=seed))]
        if suite == "axioms":
            samples = self._axiom_samples(seed)
            return [
                (f"axioms[beta={beta}]", partial(verify_axioms, samples, [beta], tol, seed=seed))
                for beta in AXIOM_BETAS
            ]
        if suite == "schur":
            per_beta = max(1, settings.schur_trials // len(SCHUR_BETAS))
            return [
                (f"schur[beta={beta}]", partial(schur_concavity_suite, [beta], per_beta, seed))
                for beta in SCHUR_BETAS
            ]
        if suite == "alpha":
            return [("alpha", partial(alpha_suite, trials=settings.alpha_trials, seed=seed))]
        if suite == "bounds":
            return [("bounds", partial(bounds_suite, trials=settings.bounds_trials, seed=seed))]
        if suite == "solver":
            options = SolverOptions.from_settings(settings, seed=seed)
            return [("solver", partial(solver_suite, options=options))]
        raise ParameterDomainError("suite", f"unknown suite '{suite}', expected one of {', '.join(SUITES)} or all")

    async def run(self, suites: Sequence[str], seed: int, tol: float) -> SuiteReport:
        """Run the named suites and merge their reports in a fixed order."""
        names = list(SUITES) if "all" in suites else list(suites)
        jobs = [job for suite in names for job in self.jobs(suite, seed, tol)]
        semaphore = asyncio.Semaphore(self._settings.fairmetric_threads)

        async def guarded(label: str, job: Job) -> SuiteReport:
            async with semaphore:
                started = time.perf_counter()
                report = await asyncio.to_thread(job)
                logger.debug(f"[VERIFY] {label} finished in {time.perf_counter() - started:.2f}s")
                return report

        logger.info(f"[VERIFY] running {len(jobs)} jobs from {', '.join(names)} on {self._settings.fairmetric_threads} threads")
        results = await asyncio.gather(*(guarded(label, job) for label, job in jobs), return_exceptions=True)

        reports = []
        for (label, _), result in zip(jobs, results):
            if isinstance(result, BaseException):
                logger.error(f"[VERIFY] {label} raised {type(result).__name__}: {result}")
                crashed = SuiteReport(label.split("[")[0])
                crashed.add("suite_error", False, detail=f"{type(result).__name__}: {result}")
                reports.append(crashed)
            else:
                reports.append(result)

        merged = SuiteReport.merge("verify", reports)
        counts = merged.counts()
        logger.info(
            f"[VERIFY] {counts['passed']} passed, {counts['failed']} failed, "
            f"{counts['skipped']} skipped, {counts['flagged']} flagged"
        )
        return merged

    def run_sync(self, suites: Sequence[str], seed: int, tol: float) -> SuiteReport:
        """Blocking wrapper around run()."""
        return asyncio.run(self.run(suites, seed, tol))
