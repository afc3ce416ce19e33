from pydantic import BaseModel, ConfigDict, Field


class Tolerances(BaseModel):
    """Numerical tolerances used across the package.

    All values are positive; the CLI builds overrides with `with_overrides`.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    trace_tol: float = Field(1e-9, gt=0)
    psd_tol: float = Field(1e-10, gt=0)
    quad_tol: float = Field(1e-8, gt=0)
    halflife_tol: float = Field(1e-4, gt=0)
    oracle_dt: float = Field(1e-4, gt=0)
    margin_tol: float = Field(1e-12, gt=0)
    leakage_tol: float = Field(1e-8, gt=0)

    def with_overrides(self, **overrides: float) -> "Tolerances":
        return Tolerances(**{**self.model_dump(), **overrides})


DEFAULT_TOLERANCES = Tolerances()
