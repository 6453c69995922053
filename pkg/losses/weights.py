"""
Loss weights: alpha/beta for the AE objective and the cross-adversarial weights.
"""
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import ConfigurationError

SUM_TOLERANCE = 1e-9


class LossWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.9, ge=0.0, le=1.0)
    beta: float = Field(default=0.1, ge=0.0, le=1.0)
    # uniform weight of every AE_j term in D_i's objective
    cross_weight: float = Field(default=0.01, ge=0.0)
    # per-source weights alpha_j; when set it must name every component
    cross_weights: dict[int, float] = Field(default_factory=dict)
    # directed weights: cross_matrix[i][j] scales AE_j's term in D_i's objective
    cross_matrix: list[list[float]] | None = None

    @model_validator(mode="after")
    def _check(self):
        if abs(self.alpha + self.beta - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"alpha + beta must be 1, got {self.alpha} + {self.beta}")
        if any(w < 0 for w in self.cross_weights.values()):
            raise ValueError("cross_weights must be nonnegative")
        if self.cross_matrix is not None:
            k = len(self.cross_matrix)
            for i, row in enumerate(self.cross_matrix):
                if len(row) != k:
                    raise ValueError("cross_matrix must be square")
                if row[i] != 0:
                    raise ValueError(f"cross_matrix[{i}][{i}] must be 0")
                if any(w < 0 for w in row):
                    raise ValueError("cross_matrix entries must be nonnegative")
        return self

    def cross_weights_for(self, i: int, k: int) -> dict[int, float]:
        """Weights alpha_j of every j != i for discriminator i."""
        others = [j for j in range(k) if j != i]
        if self.cross_matrix is not None:
            if len(self.cross_matrix) != k:
                raise ConfigurationError(f"cross_matrix is {len(self.cross_matrix)}x{len(self.cross_matrix)}, model has K={k}")
            return {j: float(self.cross_matrix[i][j]) for j in others}
        if self.cross_weights:
            missing = [j for j in others if j not in self.cross_weights]
            if missing:
                raise ConfigurationError(f"no cross weight for component(s) {missing}")
            return {j: float(self.cross_weights[j]) for j in others}
        return {j: self.cross_weight for j in others}
