"""Pure-numpy Euler-Maruyama step kernel.

Same contract as the compiled kernel in _kernel.pyx: fills the provided
output arrays in place and returns the blow-up step index (-1 if none).
The state recursion is a per-step Python loop (it is inherently
sequential); costs and estimator integrals are vectorized afterwards.
Expect roughly 20-50x slower than the compiled kernel.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def run_segment(
    A,
    B,
    K,
    S,
    Q,
    R,
    x0,
    dt,
    dW,
    u_seq,
    blow_up,
    states,
    inputs,
    step_costs,
    Vd,
    Cd,
    Md,
    update_acc,
):
    n = dW.shape[0]
    p = A.shape[0]
    blow2 = blow_up * blow_up
    states[0] = x0
    x = np.array(x0, dtype=float)
    blow_step = -1

    if u_seq is None:
        # u = K x folded into one step matrix: x' = (I + (A + B K) dt) x + S dW
        M1 = np.eye(p) + (A + B @ K) * dt
        for k in range(n):
            x = M1 @ x + S @ dW[k]
            states[k + 1] = x
            if not x @ x <= blow2:  # also catches NaN
                blow_step = k + 1
                break
    else:
        for k in range(n):
            x = x + (A @ x + B @ u_seq[k]) * dt + S @ dW[k]
            states[k + 1] = x
            if not x @ x <= blow2:
                blow_step = k + 1
                break

    n_done = n if blow_step < 0 else blow_step
    X = states[: n_done + 1]
    if u_seq is None:
        inputs[: n_done + 1] = X @ K.T
    else:
        inputs[:n_done] = u_seq[:n_done]
        if n > 0:
            inputs[n_done] = u_seq[min(n_done, n - 1)]

    X0 = states[:n_done]
    U0 = inputs[:n_done]
    step_costs[:n_done] = np.einsum("ki,ij,kj->k", X0, Q, X0) + np.einsum(
        "ki,ij,kj->k", U0, R, U0
    )
    if update_acc and n_done > 0:
        Z = np.hstack([X0, U0])
        Vd += dt * (Z.T @ Z)
        Cd += Z.T @ (states[1 : n_done + 1] - X0)
        Md += Z.T @ dW[:n_done]
    return blow_step
