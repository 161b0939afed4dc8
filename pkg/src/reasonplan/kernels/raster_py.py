"""Pure numpy pseudo-camera rasterizer, the fallback for the compiled kernel.

Polar raster: rows are range bins (row 0 farthest), columns are bearing bins
across the field of view (column 0 leftmost). Formulas mirror `_raster.pyx`
operation-for-operation (squared-distance compares, no trig inside, FMA
contraction disabled on the C side) so both backends produce bit-identical
rasters.
"""

from __future__ import annotations

import numpy as np

# class-id -> draw priority when boxes overlap (pedestrian wins over vehicle
# wins over static); non-box classes never compete with boxes.
_BOX_PRIORITY = {2.0: 2, 3.0: 3, 4.0: 1}


def _seg_dist2(wx, wy, x1, y1, x2, y2):
    dx = x2 - x1
    dy = y2 - y1
    len2 = dx * dx + dy * dy
    if len2 <= 0.0:
        ex = wx - x1
        ey = wy - y1
        return ex * ex + ey * ey
    t = ((wx - x1) * dx + (wy - y1) * dy) / len2
    t = np.minimum(1.0, np.maximum(0.0, t))
    ex = wx - (x1 + t * dx)
    ey = wy - (y1 + t * dy)
    return ex * ex + ey * ey


def render_view(h, w, cam_x, cam_y, cam_cos, cam_sin, bearing_cos, bearing_sin,
                max_range, box_pad, boxes, lane_segs, route_segs,
                route_halfwidth, light_segs, light_halfwidth):
    """Rasterize one camera view to an (h, w) uint8 class grid.

    `box_pad` inflates agent boxes by half a radial bin so a box crossed by a
    ray always lands in at least one range bin (no point-sampling dropouts).
    """
    row = np.arange(h, dtype=np.float64)[:, None]
    d = (h - row - 0.5) * (max_range / h)
    cb = np.asarray(bearing_cos, dtype=np.float64)[None, :]
    sb = np.asarray(bearing_sin, dtype=np.float64)[None, :]
    dir_x = cam_cos * cb - cam_sin * sb
    dir_y = cam_sin * cb + cam_cos * sb
    wx = cam_x + d * dir_x
    wy = cam_y + d * dir_y

    cls = np.zeros((h, w), dtype=np.uint8)
    best_prio = np.zeros((h, w), dtype=np.int64)
    inside_any = []
    for b in boxes:
        bcx, bcy, bc, bs, bhx, bhy, bclass, _ = b
        dx = wx - bcx
        dy = wy - bcy
        lx = bc * dx + bs * dy
        ly = -bs * dx + bc * dy
        qx = np.maximum(np.abs(lx) - bhx, 0.0)
        qy = np.maximum(np.abs(ly) - bhy, 0.0)
        inside = qx * qx + qy * qy <= box_pad * box_pad
        inside_any.append(inside)
        prio = _BOX_PRIORITY[bclass]
        take = inside & (prio > best_prio)
        cls[take] = int(bclass)
        best_prio[take] = prio

    ground = cls == 0
    for seg in light_segs:
        d2 = _seg_dist2(wx, wy, seg[0], seg[1], seg[2], seg[3])
        take = ground & (d2 <= light_halfwidth * light_halfwidth)
        cls[take] = int(seg[4])
        ground &= ~take
    for seg in route_segs:
        d2 = _seg_dist2(wx, wy, seg[0], seg[1], seg[2], seg[3])
        take = ground & (d2 <= route_halfwidth * route_halfwidth)
        cls[take] = 8
        ground &= ~take
    for seg in lane_segs:
        d2 = _seg_dist2(wx, wy, seg[0], seg[1], seg[2], seg[3])
        take = ground & (d2 <= seg[4] * seg[4])
        cls[take] = 1
        ground &= ~take

    # Occlusion: a non-empty cell goes dark when the ray from the camera
    # origin crosses an opaque box the cell point is not itself inside.
    occluded = np.zeros((h, w), dtype=bool)
    for bi, b in enumerate(boxes):
        if b[7] == 0.0:
            continue
        bcx, bcy, bc, bs, bhx, bhy = b[:6]
        ox = bc * (cam_x - bcx) + bs * (cam_y - bcy)
        oy = -bs * (cam_x - bcx) + bc * (cam_y - bcy)
        dxw = wx - bcx
        dyw = wy - bcy
        ex = bc * dxw + bs * dyw
        ey = -bs * dxw + bc * dyw
        dx = ex - ox
        dy = ey - oy
        with np.errstate(divide="ignore", invalid="ignore"):
            txa = (-bhx - ox) / dx
            txb = (bhx - ox) / dx
            tya = (-bhy - oy) / dy
            tyb = (bhy - oy) / dy
        t0x = np.minimum(txa, txb)
        t1x = np.maximum(txa, txb)
        t0y = np.minimum(tya, tyb)
        t1y = np.maximum(tya, tyb)
        deg_x = dx == 0.0
        deg_y = dy == 0.0
        miss = (deg_x & (abs(ox) > bhx)) | (deg_y & (abs(oy) > bhy))
        t0x = np.where(deg_x, 0.0, t0x)
        t1x = np.where(deg_x, 1.0, t1x)
        t0y = np.where(deg_y, 0.0, t0y)
        t1y = np.where(deg_y, 1.0, t1y)
        t0 = np.maximum(0.0, np.maximum(t0x, t0y))
        t1 = np.minimum(1.0, np.minimum(t1x, t1y))
        hit = ~miss & (t0 <= t1)
        occluded |= hit & ~inside_any[bi]

    cls[occluded] = 0
    return cls
