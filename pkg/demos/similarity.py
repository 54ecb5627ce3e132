"""
Align the model M(c') to the boundary of M around the small copy at s1.

Prints the normalized Hausdorff residual after a similarity fit, and the
residual of the map predicted by the copy size alone.

    python demos/similarity.py
"""
from decolab import ModelSpec, decoration_similarity, find_center_near


def main():
    s1, q = find_center_near("0.3626684938191616+0.6450238859863952i", 300)
    spec = ModelSpec.douady("-0.10+0.97i", 220.0)
    rep = decoration_similarity(spec, s1, q, window_factor=10.0, pixels=300,
                                max_iter=20000)
    for k, v in rep.metrics.items():
        print(f"{k:20s} {v:.6g}")
    print("passed" if rep.passed else "not passed", "-", rep.notes)


if __name__ == "__main__":
    main()
