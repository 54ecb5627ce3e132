"""
Decorated model M(c') drawn over a render of M.

The cloud has one copy of J_{c'} per decoration level; level m sits in the
band 2^-m log R < G_M < 2^(1-m) log R.

    python demos/model_overlay.py [out.png]
"""
import sys

import numpy as np

from decolab import FrameSpec, ModelSpec, build_model_M, green_M, overlay, render

C_PRIME = "-0.10+0.97i"
R = 220.0


def main(path="model_overlay.png"):
    spec = ModelSpec.douady(C_PRIME, R, m_max=6, samples_per_level=512)
    cloud = build_model_M(spec)
    print(f"{len(cloud)} points, dropped per level {cloud.meta['dropped']}")
    for m in range(spec.m_max + 1):
        pts = cloud.plane[cloud.levels == m]
        g = np.array([green_M(complex(c)) for c in pts[:: max(1, len(pts) // 20)]])
        print(f"    level {m}: {len(pts):5d} pts, G_M in [{g.min():.3g}, {g.max():.3g}]")
    frame = FrameSpec(-0.5, 3.2, (512, 512), 500, coloring="distance")
    overlay(render(frame), cloud).save(path)
    print(f"wrote {path}")


if __name__ == "__main__":
    main(*sys.argv[1:])
