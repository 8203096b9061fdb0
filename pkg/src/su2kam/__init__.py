"""Quasiperiodic SU(2) cocycles: KAM conjugation, reducibility classification,
harmonic analysis on T x S^3 and approximate cohomological solvers.

The package is organized bottom-up:

- ``algebra``: exact arithmetic on SU(2) and su(2) in sphere coordinates.
- ``arithmetic``: continued fractions, Diophantine classes, resonance detection.
- ``torusmaps``: band-limited Fourier maps T -> su(2) / T -> SU(2) and the
  linearized conjugation equations.
- ``kam``: the conjugation step, the scheme driver, normal forms and the
  significant-parameter sequence.
- ``harmonics``: the psi/pi harmonic bases on S^3, frame changes and Legendre
  projection factors.
- ``cohomology``: obstruction partitions, single- and multi-stage solvers,
  stability witnesses.
- ``classify``: the reducibility verdict and the ergodicity/stability
  condition evaluators.
- ``gallery``: constructors of cocycle families with planted ground truth.
- ``cli``: the batch front door.
"""

__version__ = "0.1.0"
