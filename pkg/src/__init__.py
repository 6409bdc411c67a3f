"""
Direct-sum quantum state recovery simulator.

Packages:
- linalg: block operators on H_d (+) H_d^perp
- quantum: density matrices, instruments, metrics, seeded randomness
- protocol: quasi-copy, outer measurement and outcome-independent recovery
- qrm: quantum reversible measurement baseline and trade-off
- oracle: dense tensor-product cross-check
- cli: validate / run / montecarlo / tradeoff
"""
