# Compiled twin of _numpy_kernels: batched SO(3) exp/log and edge residuals.
# Scalar loops in C beat the numpy version once temporaries dominate.

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, sin, cos, atan2

cnp.import_array()

DEF SMALL = 1e-6


cdef inline void _exp_one(const double* v, double* R) nogil:
    cdef double t2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
    cdef double t = sqrt(t2)
    cdef double a, b
    if t < SMALL:
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
    else:
        a = sin(t) / t
        b = (1.0 - cos(t)) / t2
    cdef double x = v[0], y = v[1], z = v[2]
    R[0] = 1.0 + b * (-y * y - z * z)
    R[1] = -a * z + b * x * y
    R[2] = a * y + b * x * z
    R[3] = a * z + b * x * y
    R[4] = 1.0 + b * (-x * x - z * z)
    R[5] = -a * x + b * y * z
    R[6] = -a * y + b * x * z
    R[7] = a * x + b * y * z
    R[8] = 1.0 + b * (-x * x - y * y)


cdef inline void _quat_one(const double* R, double* q) nogil:
    cdef double t = R[0] + R[4] + R[8]
    cdef double r, s, norm
    if t >= R[0] and t >= R[4] and t >= R[8]:
        r = sqrt(1.0 + t)
        s = 0.5 / r
        q[0] = 0.5 * r
        q[1] = (R[7] - R[5]) * s
        q[2] = (R[2] - R[6]) * s
        q[3] = (R[3] - R[1]) * s
    elif R[0] >= R[4] and R[0] >= R[8]:
        r = sqrt(1.0 - t + 2.0 * R[0])
        s = 0.5 / r
        q[0] = (R[7] - R[5]) * s
        q[1] = 0.5 * r
        q[2] = (R[1] + R[3]) * s
        q[3] = (R[2] + R[6]) * s
    elif R[4] >= R[8]:
        r = sqrt(1.0 - t + 2.0 * R[4])
        s = 0.5 / r
        q[0] = (R[2] - R[6]) * s
        q[1] = (R[1] + R[3]) * s
        q[2] = 0.5 * r
        q[3] = (R[5] + R[7]) * s
    else:
        r = sqrt(1.0 - t + 2.0 * R[8])
        s = 0.5 / r
        q[0] = (R[3] - R[1]) * s
        q[1] = (R[2] + R[6]) * s
        q[2] = (R[5] + R[7]) * s
        q[3] = 0.5 * r
    norm = sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    cdef int i
    if q[0] < 0.0:
        norm = -norm
    for i in range(4):
        q[i] /= norm


cdef inline void _log_one(const double* R, double* v) nogil:
    cdef double q[4]
    _quat_one(R, q)
    cdef double n = sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    cdef double angle = 2.0 * atan2(n, q[0])
    cdef double scale
    if n < SMALL:
        scale = 2.0 + angle * angle / 12.0
    else:
        scale = angle / n
    v[0] = scale * q[1]
    v[1] = scale * q[2]
    v[2] = scale * q[3]


def batch_exp(vs):
    """(M, 3) axis-angle vectors -> (M, 3, 3) rotation matrices."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v = np.ascontiguousarray(vs, dtype=np.float64)
    cdef Py_ssize_t m = v.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((m, 3, 3))
    for i in range(m):
        _exp_one(&v[i, 0], &out[i, 0, 0])
    return out


def batch_quat(Rs):
    """(M, 3, 3) rotation matrices -> (M, 4) unit quaternions (w,x,y,z), w >= 0."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] R = np.ascontiguousarray(Rs, dtype=np.float64)
    cdef Py_ssize_t m = R.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, 4))
    for i in range(m):
        _quat_one(&R[i, 0, 0], &out[i, 0])
    return out


def batch_log(Rs):
    """(M, 3, 3) rotation matrices -> (M, 3) canonical axis-angle vectors."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] R = np.ascontiguousarray(Rs, dtype=np.float64)
    cdef Py_ssize_t m = R.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, 3))
    for i in range(m):
        _log_one(&R[i, 0, 0], &out[i, 0])
    return out


def edge_residuals(Ri, Rj, Rij):
    """Per-edge tangent residuals log(Rj^T @ Rij @ Ri), all (M, 3, 3) stacked."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] A = np.ascontiguousarray(Ri, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] B = np.ascontiguousarray(Rj, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] C = np.ascontiguousarray(Rij, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0], i
    cdef int r, c, k
    cdef double T1[9]
    cdef double T2[9]
    cdef double acc
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, 3))
    for i in range(m):
        # T1 = Rj^T @ Rij
        for r in range(3):
            for c in range(3):
                acc = 0.0
                for k in range(3):
                    acc += B[i, k, r] * C[i, k, c]
                T1[3 * r + c] = acc
        # T2 = T1 @ Ri
        for r in range(3):
            for c in range(3):
                acc = 0.0
                for k in range(3):
                    acc += T1[3 * r + k] * A[i, k, c]
                T2[3 * r + c] = acc
        _log_one(T2, &out[i, 0])
    return out
