"""
Indirect boundary data: time Fourier coefficients of the Cauchy traces.
"""

import logging

from models.fields import CauchyData, IndirectData
from tools.time_basis import TimeBasis

logger = logging.getLogger(__name__)


def project(data: CauchyData, basis: TimeBasis) -> IndirectData:
    """
    F_tilde_n(x) = sum_k w_k F(x, t_k) Psi_n(t_k), and the same for G.

    The weights are the basis' own quadrature weights so that projecting a
    sampled Psi_n returns the n-th unit vector.

    Raises:
        ValueError: If data and basis live on different time partitions
    """
    if data.partition != basis.partition:
        raise ValueError(
            f"Cauchy data on N_T={data.partition.N_T}, T={data.partition.T} "
            f"but basis on N_T={basis.partition.N_T}, T={basis.partition.T}"
        )
    F_tilde = basis.project(data.F).T
    G_tilde = basis.project(data.G).T
    logger.debug(f"Projected {F_tilde.shape[0]} Dirichlet and {G_tilde.shape[0]} Neumann series onto N={basis.N}")
    return IndirectData(data.nodes, F_tilde, G_tilde)
