"""
Fifteen frames from width 10^-1.5 down to 10^-11.9 around s1.

The last frames need perturbation rendering against one high-precision
reference orbit; the final frame shows the small copy M_{s1}.

    python demos/deep_zoom.py [out_dir]
"""
import os
import sys

from decolab import FrameSpec, ZoomSchedule, render_auto

S1 = "0.3626684938191616+0.6450238859863952i"


def main(out="deep_zoom"):
    os.makedirs(out, exist_ok=True)
    sched = ZoomSchedule(S1, 10 ** -1.5, 10 ** -11.9, 15)
    for k, w in enumerate(sched.widths(), 1):
        img = render_auto(FrameSpec(S1, w, (192, 192), 5000, coloring="distance"))
        img.save(os.path.join(out, f"frame{k:03d}.png"))
        print(f"frame {k:2d}  width {w:.3e}  interior {int(img.interior.sum()):5d}  "
              f"engine {img.meta.get('engine')}")


if __name__ == "__main__":
    main(*sys.argv[1:])
