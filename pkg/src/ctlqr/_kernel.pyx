# Compiled Euler-Maruyama step kernel. Mirrors _kernel_py.run_segment:
# fills the output arrays in place, returns the blow-up step index or -1.
# Hot path: everything inside the nogil block works on typed memoryviews.

import numpy as np

BACKEND_NAME = "cython"


def run_segment(
    double[:, ::1] A,
    double[:, ::1] B,
    double[:, ::1] K,
    double[:, ::1] S,
    double[:, ::1] Q,
    double[:, ::1] R,
    double[::1] x0,
    double dt,
    double[:, ::1] dW,
    object u_seq,
    double blow_up,
    double[:, ::1] states,
    double[:, ::1] inputs,
    double[::1] step_costs,
    double[:, ::1] Vd,
    double[:, ::1] Cd,
    double[:, ::1] Md,
    bint update_acc,
):
    cdef Py_ssize_t n = dW.shape[0]
    cdef Py_ssize_t p = A.shape[0]
    cdef Py_ssize_t q = B.shape[1]
    cdef Py_ssize_t d = p + q
    cdef bint feedback = u_seq is None
    cdef double[:, ::1] useq = None
    if not feedback:
        useq = u_seq

    scratch = np.empty(p + q + p + q, dtype=np.float64)
    cdef double[::1] u = scratch[:q]
    cdef double[::1] z = scratch[q : q + d]

    cdef Py_ssize_t k, i, j
    cdef Py_ssize_t blow_step = -1
    cdef double acc, c, xv, nrm2
    cdef double blow2 = blow_up * blow_up

    with nogil:
        for i in range(p):
            states[0, i] = x0[i]
        for k in range(n):
            if feedback:
                for i in range(q):
                    acc = 0.0
                    for j in range(p):
                        acc += K[i, j] * states[k, j]
                    u[i] = acc
            else:
                for i in range(q):
                    u[i] = useq[k, i]
            for i in range(q):
                inputs[k, i] = u[i]

            c = 0.0
            for i in range(p):
                acc = 0.0
                for j in range(p):
                    acc += Q[i, j] * states[k, j]
                c += states[k, i] * acc
            for i in range(q):
                acc = 0.0
                for j in range(q):
                    acc += R[i, j] * u[j]
                c += u[i] * acc
            step_costs[k] = c

            nrm2 = 0.0
            for i in range(p):
                acc = 0.0
                for j in range(p):
                    acc += A[i, j] * states[k, j]
                for j in range(q):
                    acc += B[i, j] * u[j]
                xv = states[k, i] + acc * dt
                for j in range(p):
                    xv += S[i, j] * dW[k, j]
                states[k + 1, i] = xv
                nrm2 += xv * xv

            if update_acc:
                for i in range(p):
                    z[i] = states[k, i]
                for i in range(q):
                    z[p + i] = u[i]
                for i in range(d):
                    for j in range(d):
                        Vd[i, j] += z[i] * z[j] * dt
                    for j in range(p):
                        Cd[i, j] += z[i] * (states[k + 1, j] - states[k, j])
                        Md[i, j] += z[i] * dW[k, j]

            if not nrm2 <= blow2:
                blow_step = k + 1
                break

    cdef Py_ssize_t n_done = n if blow_step < 0 else blow_step
    if feedback:
        for i in range(q):
            acc = 0.0
            for j in range(p):
                acc += K[i, j] * states[n_done, j]
            inputs[n_done, i] = acc
    elif n > 0:
        k = n_done if n_done < n else n - 1
        for i in range(q):
            inputs[n_done, i] = useq[k, i]
    return blow_step
