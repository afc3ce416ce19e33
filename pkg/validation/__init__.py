from validation.orchestrator import CheckResult, ValidationOrchestrator, ValidationReport, run_validation

__all__ = ["CheckResult", "ValidationOrchestrator", "ValidationReport", "run_validation"]
