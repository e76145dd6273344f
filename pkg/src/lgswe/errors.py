"""Exception types shared by all modules.

Every error carries a short machine-readable ``code`` so the command line
front end can report failures without parsing messages.
"""


class LgsweError(Exception):
    code = "ERROR"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class MeshParseError(LgsweError):
    code = "PARSE_ERROR"


class GeometryError(LgsweError):
    code = "GEOMETRY_ERROR"


class InputError(LgsweError):
    code = "INPUT_ERROR"


class PositivityLost(LgsweError):
    """Total wave height dropped to (or below) zero somewhere."""

    code = "POSITIVITY_LOST"


class NoConvergence(LgsweError):
    code = "NO_CONVERGENCE"

    def __init__(self, iterations, residual):
        super().__init__(
            f"PCG did not converge after {iterations} iterations "
            f"(relative residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual

    def to_dict(self):
        d = super().to_dict()
        d.update(iterations=self.iterations, residual=self.residual)
        return d


class ConstraintConflict(LgsweError):
    code = "CONSTRAINT_CONFLICT"
