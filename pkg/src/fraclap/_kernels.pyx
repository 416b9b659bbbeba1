# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the scalar kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, pow, tgamma, INFINITY
from scipy.special.cython_special cimport kve

cnp.import_array()


def profile(double s, tau):
    tau_arr = np.ascontiguousarray(tau, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = tau_arr.reshape(-1)
    cdef Py_ssize_t n = flat.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] phi = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dphi = np.empty(n)
    cdef double pref = pow(2.0, 1.0 - s) / tgamma(s)
    cdef double t, w, dzero
    if s < 0.5:
        dzero = -INFINITY
    elif s == 0.5:
        dzero = -1.0
    else:
        dzero = 0.0
    with nogil:
        for i in range(n):
            t = flat[i]
            if t <= 0.0:
                phi[i] = 1.0
                dphi[i] = dzero
            else:
                w = pref * exp(s * log(t) - t)
                phi[i] = w * kve(s, t)
                dphi[i] = -w * kve(1.0 - s, t)
    shape = np.shape(tau_arr)
    return phi.reshape(shape), dphi.reshape(shape)


def sign_changes(values, double threshold):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i, n = v.shape[0]
    cdef int count = 0, last = 0, sgn
    for i in range(n):
        if v[i] > threshold:
            sgn = 1
        elif v[i] < -threshold:
            sgn = -1
        else:
            continue
        if last != 0 and sgn != last:
            count += 1
        last = sgn
    return count
