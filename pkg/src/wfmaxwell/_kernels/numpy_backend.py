"""Pure-numpy element kernels, the fallback when the extension is absent."""

import numpy as np


def curl_curl_local(gref, wq, jinv, detj):
    """Local curl-curl matrices, shape (nt, 3*nl, 3*nl). See the .pyx twin."""
    nq, nl, _ = gref.shape
    nt = jinv.shape[0]

    # Physical gradients: g[t,q,n,d] = sum_e gref[q,n,e] jinv[t,e,d]
    g = np.einsum("qne,ted->tqnd", gref, jinv)
    # T[t,d,c,n,m] = sum_q w_q detJ_t d_d(phi_n) d_c(phi_m)
    T = np.einsum("q,t,tqnd,tqmc->tdcnm", wq, detj, g, g, optimize=True)

    out = np.empty((nt, 3 * nl, 3 * nl))
    trace = T[:, 0, 0] + T[:, 1, 1] + T[:, 2, 2]
    for c in range(3):
        for d in range(3):
            block = -T[:, d, c]
            if c == d:
                block = block + trace
            out[:, c::3, d::3] = block
    return out
