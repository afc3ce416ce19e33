"""Cross-route consistency checks run as a small pipeline over one state."""

import logging
import math
import time
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from infra.logging import get_event_logger
from qcs.errors import QcsError, UnsupportedFamily
from qcs.metrics import (
    QcsReport,
    closed_form_kappa,
    commutator_route,
    gaussian_principal_variances,
    qcs,
    qcs_gaussian,
    qcs_theta,
)
from qcs.states import State, state_from_matrix, to_fock_matrix, total_noise
from qcs.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)
event_logger = get_event_logger()

ROUTE_TOL = 1e-6
POSITIVITY_ANGLES = (0.0, math.pi / 8, math.pi / 4, math.pi / 2)


class CheckResult(BaseModel):
    name: str
    passed: bool
    skipped: bool = False
    reason: Optional[str] = None
    values: Dict[str, float] = Field(default_factory=dict)
    elapsed_seconds: float = 0.0
    error: Optional[str] = None


class ValidationReport(BaseModel):
    family: str
    checks: List[CheckResult]
    passed: bool
    processing_time_seconds: float
    workflow_trace: List[Dict[str, Any]]


def _close(a: float, b: float, tol: float = ROUTE_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


class Check:
    """Base check; ``process`` returns the result and the next check to run"""

    def __init__(self, name: str, description: str):
        self.name = name
        self.description = description

    def process(self, context: Dict[str, Any]) -> Dict[str, Any]:
        raise NotImplementedError

    def skip(self, reason: str, next_check: str) -> Dict[str, Any]:
        result = CheckResult(name=self.name, passed=True, skipped=True, reason=reason)
        return {"result": result, "next_check": next_check}


class ChiMomentsCheck(Check):
    """Baseline QCS report every other check compares against"""

    def __init__(self):
        super().__init__("chi_moments", "Radial characteristic-function moments at t = 0")

    def process(self, context: Dict[str, Any]) -> Dict[str, Any]:
        report: QcsReport = qcs(context["state"], context["tolerances"])
        result = CheckResult(
            name=self.name,
            passed=True,
            values={"C_squared": report.C_squared, "purity": report.purity, "kappa": report.kappa},
        )
        return {"qcs_report": report, "result": result, "next_check": "route_agreement"}


class RouteAgreementCheck(Check):
    def __init__(self):
        super().__init__("route_agreement", "chi moments vs commutator vs Gaussian closed form")

    def process(self, context: Dict[str, Any]) -> Dict[str, Any]:
        state: State = context["state"]
        baseline: QcsReport = context["qcs_report"]
        commutator = commutator_route(state, context["tolerances"])
        values = {"chi_moments": baseline.C_squared, "commutator": commutator.C_squared}
        passed = _close(baseline.C_squared, commutator.C_squared)
        if state.moments is not None:
            gaussian = qcs_gaussian(state.moments)
            values["gaussian_closed_form"] = gaussian.C_squared
            passed = passed and _close(baseline.C_squared, gaussian.C_squared)
        result = CheckResult(name=self.name, passed=passed, values=values)
        return {"result": result, "next_check": "purity_identity"}


class PurityIdentityCheck(Check):
    def __init__(self):
        super().__init__("purity_identity", "I0 / pi against Tr rho^2")

    def process(self, context: Dict[str, Any]) -> Dict[str, Any]:
        matrix = to_fock_matrix(context["state"], tolerances=context["tolerances"]).matrix
        chi_purity = context["qcs_report"].purity
        values = {"chi_moments": chi_purity, "fock_trace": matrix.purity}
        result = CheckResult(name=self.name, passed=_close(chi_purity, matrix.purity), values=values)
        return {"fock_matrix": matrix, "result": result, "next_check": "moment_consistency"}


class MomentConsistencyCheck(Check):
    def __init__(self):
        super().__init__("moment_consistency", "kappa >= 0 and the family closed form")

    def process(self, context: Dict[str, Any]) -> Dict[str, Any]:
        kappa = context["qcs_report"].kappa
        values = {"kappa": kappa}
        passed = kappa >= -1e-9
        try:
            expected = closed_form_kappa(context["state"])
        except UnsupportedFamily:
            expected = None
        if expected is not None:
            values["closed_form"] = expected
            passed = passed and _close(kappa, expected)
        result = CheckResult(name=self.name, passed=passed, values=values)
        return {"result": result, "next_check": "total_noise"}


class TotalNoiseCheck(Check):
    def __init__(self):
        super().__init__("total_noise", "C^2 = Delta X^2 + Delta P^2 for pure states")

    def process(self, context: Dict[str, Any]) -> Dict[str, Any]:
        state: State = context["state"]
        if not state.is_pure:
            return self.skip("state is mixed", "quadrature_positivity")
        matrix = context.get("fock_matrix") or to_fock_matrix(state, tolerances=context["tolerances"]).matrix
        noise = total_noise(state_from_matrix(np.asarray(matrix.data), context["tolerances"]))
        c_squared = context["qcs_report"].C_squared
        result = CheckResult(
            name=self.name,
            passed=_close(c_squared, noise),
            values={"C_squared": c_squared, "total_noise": noise},
        )
        return {"result": result, "next_check": "quadrature_positivity"}


class QuadraturePositivityCheck(Check):
    def __init__(self):
        super().__init__("quadrature_positivity", "C_{X_theta}^2 > 0 and C_X^2 + C_P^2 = 2 C^2")

    def process(self, context: Dict[str, Any]) -> Dict[str, Any]:
        c_squared = context["qcs_report"].C_squared
        values: Dict[str, float] = {}
        passed = True
        for theta in POSITIVITY_ANGLES:
            x_part, p_part = qcs_theta(context["state"], theta, tolerances=context["tolerances"])
            values[f"C_X^2[{theta:.6f}]"] = x_part
            passed = passed and x_part > 0 and p_part > 0 and _close(x_part + p_part, 2 * c_squared)
        result = CheckResult(name=self.name, passed=passed, values=values)
        return {"result": result, "next_check": "gaussian_marginal"}


class GaussianMarginalCheck(Check):
    def __init__(self):
        super().__init__("gaussian_marginal", "1/(2 sigma_p*^2) <= C^2 <= 1/(2 sigma_x*^2)")

    def process(self, context: Dict[str, Any]) -> Dict[str, Any]:
        state: State = context["state"]
        if state.moments is None:
            return self.skip("state is not Gaussian", "complete")
        principal = gaussian_principal_variances(state.moments)
        lower, upper = principal.qcs_bounds()
        c_squared = qcs_gaussian(state.moments).C_squared
        slack = ROUTE_TOL * max(1.0, c_squared)
        result = CheckResult(
            name=self.name,
            passed=lower - slack <= c_squared <= upper + slack,
            values={
                "theta_star": principal.theta_star,
                "sigma2_x": principal.sigma2_x,
                "sigma2_p": principal.sigma2_p,
                "C_squared": c_squared,
            },
        )
        return {"result": result, "next_check": "complete"}


class ValidationOrchestrator:
    """Runs the checks in order and keeps a workflow trace"""

    def __init__(self, tolerances: Tolerances = DEFAULT_TOLERANCES):
        self.tolerances = tolerances
        self.checks: Dict[str, Check] = {
            check.name: check
            for check in (
                ChiMomentsCheck(),
                RouteAgreementCheck(),
                PurityIdentityCheck(),
                MomentConsistencyCheck(),
                TotalNoiseCheck(),
                QuadraturePositivityCheck(),
                GaussianMarginalCheck(),
            )
        }

    def run(self, state: State) -> ValidationReport:
        started = time.perf_counter()
        context: Dict[str, Any] = {"state": state, "tolerances": self.tolerances}
        results, trace = self._execute_workflow(context)
        elapsed = time.perf_counter() - started
        passed = len(results) == len(self.checks) and all(r.passed for r in results)
        event_logger.log_computation(f"validate[{state.family}]", elapsed, passed)
        logger.info(f"Validation of {state.family} finished in {elapsed:.2f} seconds, passed={passed}")
        return ValidationReport(
            family=state.family,
            checks=results,
            passed=passed,
            processing_time_seconds=elapsed,
            workflow_trace=trace,
        )

    def _execute_workflow(self, context: Dict[str, Any]):
        current = "chi_moments"
        results: List[CheckResult] = []
        trace: List[Dict[str, Any]] = []
        step = 0

        while current != "complete" and step < len(self.checks):
            step += 1
            check = self.checks[current]
            started = time.perf_counter()
            try:
                outcome = check.process(context)
            except QcsError as e:
                logger.error(f"Error in check {current}: {e}")
                results.append(CheckResult(name=current, passed=False, error=str(e),
                                           elapsed_seconds=time.perf_counter() - started))
                trace.append({
                    "step": step,
                    "check": current,
                    "action": "error",
                    "error": str(e),
                    "timestamp": datetime.now().isoformat(),
                })
                if current == "chi_moments":
                    break
                current = _FOLLOWING[current]
                continue

            result = outcome.pop("result").model_copy(update={"elapsed_seconds": time.perf_counter() - started})
            results.append(result)
            next_check = outcome.pop("next_check", "complete")
            context.update(outcome)
            trace.append({
                "step": step,
                "check": current,
                "action": "skipped" if result.skipped else "processed",
                "timestamp": datetime.now().isoformat(),
            })
            if not result.passed:
                logger.warning(f"Check {current} failed: {result.values}")
            current = next_check

        return results, trace


_FOLLOWING = {
    "route_agreement": "purity_identity",
    "purity_identity": "moment_consistency",
    "moment_consistency": "total_noise",
    "total_noise": "quadrature_positivity",
    "quadrature_positivity": "gaussian_marginal",
    "gaussian_marginal": "complete",
}


def run_validation(state: State, tolerances: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    return ValidationOrchestrator(tolerances).run(state)
