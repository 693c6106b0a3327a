# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled assembly kernels: per-triangle growth-function energies and the
nodal residual/preconditioner scatter for piecewise-linear fields on uniform
right-diagonal triangulations."""

import numpy as np

cimport numpy as cnp
from libc.math cimport hypot, log, pow

cnp.import_array()

cdef double _E = 2.718281828459045235360287471352662498

cdef inline double _powf(double s, double p) nogil:
    # the built-in families mostly use small integer exponents
    if p == 2.0:
        return s * s
    if p == 1.0:
        return s
    if p == 3.0:
        return s * s * s
    if p == 4.0:
        return (s * s) * (s * s)
    if p == 0.0:
        return 1.0
    return pow(s, p)

cdef inline double _G(int fam, double p, double q, double a, double s) nogil:
    if fam <= 1:
        return _powf(s, p)
    elif fam == 2:
        return _powf(s, p) + a * _powf(s, q)
    else:
        return _powf(s, p) * log(_E + s)

cdef inline double _g(int fam, double p, double q, double a, double s) nogil:
    cdef double tp, tq
    if s <= 0.0:
        return 0.0
    tp = _powf(s, p - 1.0)
    if fam <= 1:
        return p * tp
    elif fam == 2:
        tq = _powf(s, q - 1.0)
        return p * tp + q * a * tq
    else:
        return p * tp * log(_E + s) + _powf(s, p) / (_E + s)

cdef inline double _curv(int fam, double p, double q, double a, double s) nogil:
    # g'(s) + g(s)/s, the diagonal curvature proxy of the energy Hessian
    cdef double gp, L, sp
    if fam <= 1:
        gp = p * (p - 1.0) * _powf(s, p - 2.0)
    elif fam == 2:
        gp = p * (p - 1.0) * _powf(s, p - 2.0) + q * (q - 1.0) * a * _powf(s, q - 2.0)
    else:
        L = log(_E + s)
        sp = _powf(s, p)
        gp = (p * (p - 1.0) * _powf(s, p - 2.0) * L
              + 2.0 * p * _powf(s, p - 1.0) / (_E + s) - sp / ((_E + s) * (_E + s)))
    return gp + _g(fam, p, q, a, s) / s


def energy(double[::1] u, int[:, ::1] tri_nodes, unsigned char[::1] orient,
           int fam, double[::1] p1, double[::1] p2, double[::1] p3,
           double h, long[::1] idx):
    cdef double area = h * h / 2.0
    cdef double total = 0.0
    cdef Py_ssize_t k, t
    cdef int n0, n1, n2
    cdef double gx, gy, s
    for k in range(idx.shape[0]):
        t = idx[k]
        n0 = tri_nodes[t, 0]
        n1 = tri_nodes[t, 1]
        n2 = tri_nodes[t, 2]
        if orient[t] == 0:
            gx = (u[n1] - u[n0]) / h
            gy = (u[n2] - u[n1]) / h
        else:
            gx = (u[n1] - u[n2]) / h
            gy = (u[n2] - u[n0]) / h
        s = hypot(gx, gy)
        total += _G(fam, p1[t], p2[t], p3[t], s)
    return total * area


def assemble(double[::1] u, int[:, ::1] tri_nodes, unsigned char[::1] orient,
             int fam, double[::1] p1, double[::1] p2, double[::1] p3,
             double h, double eps_flux, double eps_curv, Py_ssize_t n_nodes,
             long[::1] idx):
    cdef double area = h * h / 2.0
    cdef double total = 0.0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] res_arr = np.zeros(n_nodes)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pre_arr = np.zeros(n_nodes)
    cdef double[::1] res = res_arr
    cdef double[::1] pre = pre_arr
    cdef Py_ssize_t k, t
    cdef int n0, n1, n2
    cdef double gx, gy, s, Gv, w, fx, fy, s1, cw
    for k in range(idx.shape[0]):
        t = idx[k]
        n0 = tri_nodes[t, 0]
        n1 = tri_nodes[t, 1]
        n2 = tri_nodes[t, 2]
        if orient[t] == 0:
            gx = (u[n1] - u[n0]) / h
            gy = (u[n2] - u[n1]) / h
        else:
            gx = (u[n1] - u[n2]) / h
            gy = (u[n2] - u[n0]) / h
        s = hypot(gx, gy)
        Gv = _G(fam, p1[t], p2[t], p3[t], s)
        total += Gv
        if s > eps_flux:
            w = _g(fam, p1[t], p2[t], p3[t], s) / s * area
        else:
            w = 0.0
        fx = w * gx / h
        fy = w * gy / h
        # hat gradients (times h): lower (a,b,d): bx=(-1,1,0), by=(0,-1,1)
        #                          upper (a,d,c): bx=(0,1,-1), by=(-1,0,1)
        if orient[t] == 0:
            res[n0] += -fx
            res[n1] += fx - fy
            res[n2] += fy
        else:
            res[n0] += -fy
            res[n1] += fx
            res[n2] += -fx + fy
        # curvature times |grad hat|^2 * area, i.e. (1,2,1)/2 or (1,1,2)/2
        s1 = s if s > eps_curv else eps_curv
        cw = _curv(fam, p1[t], p2[t], p3[t], s1) * 0.5
        if orient[t] == 0:
            pre[n0] += cw
            pre[n1] += 2.0 * cw
            pre[n2] += cw
        else:
            pre[n0] += cw
            pre[n1] += cw
            pre[n2] += 2.0 * cw
    return total * area, res_arr, pre_arr
