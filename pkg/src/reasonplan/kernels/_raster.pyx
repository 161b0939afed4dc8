# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pseudo-camera rasterizer.

Mirrors kernels/raster_py.py operation-for-operation; the build disables FMA
contraction so rasters are bit-identical across the two backends.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double dmin(double a, double b) nogil:
    return a if a < b else b


cdef inline double dmax(double a, double b) nogil:
    return a if a > b else b


cdef inline double seg_dist2(double wx, double wy, double x1, double y1,
                             double x2, double y2) nogil:
    cdef double dx = x2 - x1
    cdef double dy = y2 - y1
    cdef double len2 = dx * dx + dy * dy
    cdef double t, ex, ey
    if len2 <= 0.0:
        ex = wx - x1
        ey = wy - y1
        return ex * ex + ey * ey
    t = ((wx - x1) * dx + (wy - y1) * dy) / len2
    t = dmin(1.0, dmax(0.0, t))
    ex = wx - (x1 + t * dx)
    ey = wy - (y1 + t * dy)
    return ex * ex + ey * ey


cdef inline int box_priority(double cls) nogil:
    if cls == 3.0:
        return 3
    if cls == 2.0:
        return 2
    return 1


def render_view(int h, int w, double cam_x, double cam_y,
                double cam_cos, double cam_sin,
                cnp.ndarray[cnp.float64_t, ndim=1] bearing_cos,
                cnp.ndarray[cnp.float64_t, ndim=1] bearing_sin,
                double max_range, double box_pad,
                cnp.ndarray[cnp.float64_t, ndim=2] boxes,
                cnp.ndarray[cnp.float64_t, ndim=2] lane_segs,
                cnp.ndarray[cnp.float64_t, ndim=2] route_segs,
                double route_halfwidth,
                cnp.ndarray[cnp.float64_t, ndim=2] light_segs,
                double light_halfwidth):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((h, w), dtype=np.uint8)
    cdef int n_boxes = boxes.shape[0]
    cdef int n_lanes = lane_segs.shape[0]
    cdef int n_route = route_segs.shape[0]
    cdef int n_lights = light_segs.shape[0]

    cdef double fs = max_range / h
    cdef double rhw2 = route_halfwidth * route_halfwidth
    cdef double lhw2 = light_halfwidth * light_halfwidth

    cdef int i, j, b, k, cls, prio, best_prio
    cdef double d, cb, sb, wx, wy, dx, dy, lx, ly, d2, qx, qy
    cdef double pad2 = box_pad * box_pad
    cdef double bcx, bcy, bc, bs, bhx, bhy
    cdef double ox, oy, ex, ey, rdx, rdy
    cdef double txa, txb, tya, tyb, t0x, t1x, t0y, t1y, t0, t1
    cdef bint inside_self, hit, miss

    for i in range(h):
        d = ((h - i) - 0.5) * fs
        for j in range(w):
            cb = bearing_cos[j]
            sb = bearing_sin[j]
            wx = cam_x + d * (cam_cos * cb - cam_sin * sb)
            wy = cam_y + d * (cam_sin * cb + cam_cos * sb)

            cls = 0
            best_prio = 0
            for b in range(n_boxes):
                bcx = boxes[b, 0]; bcy = boxes[b, 1]
                bc = boxes[b, 2]; bs = boxes[b, 3]
                bhx = boxes[b, 4]; bhy = boxes[b, 5]
                dx = wx - bcx
                dy = wy - bcy
                lx = bc * dx + bs * dy
                ly = -bs * dx + bc * dy
                qx = (lx if lx >= 0.0 else -lx) - bhx
                if qx < 0.0:
                    qx = 0.0
                qy = (ly if ly >= 0.0 else -ly) - bhy
                if qy < 0.0:
                    qy = 0.0
                if qx * qx + qy * qy <= pad2:
                    prio = box_priority(boxes[b, 6])
                    if prio > best_prio:
                        best_prio = prio
                        cls = <int>boxes[b, 6]
            if cls == 0:
                for k in range(n_lights):
                    d2 = seg_dist2(wx, wy, light_segs[k, 0], light_segs[k, 1],
                                   light_segs[k, 2], light_segs[k, 3])
                    if d2 <= lhw2:
                        cls = <int>light_segs[k, 4]
                        break
            if cls == 0:
                for k in range(n_route):
                    d2 = seg_dist2(wx, wy, route_segs[k, 0], route_segs[k, 1],
                                   route_segs[k, 2], route_segs[k, 3])
                    if d2 <= rhw2:
                        cls = 8
                        break
            if cls == 0:
                for k in range(n_lanes):
                    d2 = seg_dist2(wx, wy, lane_segs[k, 0], lane_segs[k, 1],
                                   lane_segs[k, 2], lane_segs[k, 3])
                    if d2 <= lane_segs[k, 4] * lane_segs[k, 4]:
                        cls = 1
                        break
            if cls == 0:
                continue

            for b in range(n_boxes):
                if boxes[b, 7] == 0.0:
                    continue
                bcx = boxes[b, 0]; bcy = boxes[b, 1]
                bc = boxes[b, 2]; bs = boxes[b, 3]
                bhx = boxes[b, 4]; bhy = boxes[b, 5]
                ox = bc * (cam_x - bcx) + bs * (cam_y - bcy)
                oy = -bs * (cam_x - bcx) + bc * (cam_y - bcy)
                dx = wx - bcx
                dy = wy - bcy
                ex = bc * dx + bs * dy
                ey = -bs * dx + bc * dy
                qx = (ex if ex >= 0.0 else -ex) - bhx
                if qx < 0.0:
                    qx = 0.0
                qy = (ey if ey >= 0.0 else -ey) - bhy
                if qy < 0.0:
                    qy = 0.0
                inside_self = qx * qx + qy * qy <= pad2
                if inside_self:
                    continue
                rdx = ex - ox
                rdy = ey - oy
                miss = False
                if rdx == 0.0:
                    if (ox if ox >= 0.0 else -ox) > bhx:
                        miss = True
                    t0x = 0.0
                    t1x = 1.0
                else:
                    txa = (-bhx - ox) / rdx
                    txb = (bhx - ox) / rdx
                    t0x = dmin(txa, txb)
                    t1x = dmax(txa, txb)
                if rdy == 0.0:
                    if (oy if oy >= 0.0 else -oy) > bhy:
                        miss = True
                    t0y = 0.0
                    t1y = 1.0
                else:
                    tya = (-bhy - oy) / rdy
                    tyb = (bhy - oy) / rdy
                    t0y = dmin(tya, tyb)
                    t1y = dmax(tya, tyb)
                t0 = dmax(0.0, dmax(t0x, t0y))
                t1 = dmin(1.0, dmin(t1x, t1y))
                hit = (not miss) and t0 <= t1
                if hit:
                    cls = 0
                    break

            out[i, j] = <cnp.uint8_t>cls
    return out
