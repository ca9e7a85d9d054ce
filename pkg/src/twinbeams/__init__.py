"""Twin-beam squeezing: symplectic Gaussian transforms, Takagi reduction,
a collinear type-I downconversion model, and analytic Mehler-kernel modes."""

__version__ = "0.1.0"
