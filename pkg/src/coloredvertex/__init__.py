"""Exact-arithmetic and Monte Carlo engine for colored stochastic vertex models.

The package evaluates the vertex-weight families of U_q(sl-hat_{n+1}) colored
stochastic lattice models exactly over the rationals, verifies their algebraic
identities (Yang-Baxter, Cauchy, fusion, color merging), constructs the
associated colored line ensembles with their Gibbs properties, and runs the
degenerate limits (log-gamma polymer, colored ASEP) as statistical harnesses.

Modules:
    qcore      -- rational/float numeric helpers, q-special functions,
                  composition combinatorics.
    kernels    -- vertex weight families, stochasticity, sampling.
    ybe        -- exact Yang-Baxter and weight-identity verification.
    strip      -- half-strip partition functions f/G and their measures.
    models     -- rectangle samplers, height fields, exit laws, matching.
    ensembles  -- colored line ensembles and Gibbs conditional laws.
    polymer    -- log-gamma polymer and q -> 1 degeneration harness.
    asep       -- colored ASEP graphical construction and clock coupling.
    cli        -- command-line entry points and artifact emission.
"""

__version__ = "0.1.0"

__all__ = [
    "qcore",
    "kernels",
    "ybe",
    "strip",
    "models",
    "ensembles",
    "polymer",
    "asep",
    "cli",
]
