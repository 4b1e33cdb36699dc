"""Lebedev quadrature nodes and weights on the unit sphere.

Node sets are generated from their octahedral-symmetry orbits using the
classical Lebedev-Laikov parameters; weights are scaled so they sum to
4*pi.  Orders 6 through 110 cover every quadrature used here (default 26).
"""

from dataclasses import dataclass

import numpy as np


def _orbit(code, a, b, v):
    """Points of one octahedral symmetry orbit with common weight v."""
    pts = []
    if code == 0:  # (1,0,0) orbit, 6 points
        for ax in range(3):
            for s in (1.0, -1.0):
                p = [0.0, 0.0, 0.0]
                p[ax] = s
                pts.append(p)
    elif code == 1:  # (0,a,a) orbit, a=1/sqrt(2), 12 points
        a = 1.0 / np.sqrt(2.0)
        for ax in range(3):
            for s1 in (1.0, -1.0):
                for s2 in (1.0, -1.0):
                    p = [0.0, 0.0, 0.0]
                    p[(ax + 1) % 3] = s1 * a
                    p[(ax + 2) % 3] = s2 * a
                    pts.append(p)
    elif code == 2:  # (a,a,a) orbit, a=1/sqrt(3), 8 points
        a = 1.0 / np.sqrt(3.0)
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                for s3 in (1.0, -1.0):
                    pts.append([s1 * a, s2 * a, s3 * a])
    elif code == 3:  # (a,a,b) orbit, b=sqrt(1-2a^2), 24 points
        b = np.sqrt(max(0.0, 1.0 - 2.0 * a * a))
        for ax in range(3):  # position of the b component
            for s1 in (1.0, -1.0):
                for s2 in (1.0, -1.0):
                    for s3 in (1.0, -1.0):
                        p = [0.0, 0.0, 0.0]
                        p[ax] = s3 * b
                        p[(ax + 1) % 3] = s1 * a
                        p[(ax + 2) % 3] = s2 * a
                        pts.append(p)
    elif code == 4:  # (a,b,0) orbit, b=sqrt(1-a^2), 24 points
        b = np.sqrt(max(0.0, 1.0 - a * a))
        for ax in range(3):  # axis holding the zero
            for s1 in (1.0, -1.0):
                for s2 in (1.0, -1.0):
                    for swap in (0, 1):
                        p = [0.0, 0.0, 0.0]
                        u, w = (a, b) if swap == 0 else (b, a)
                        p[(ax + 1) % 3] = s1 * u
                        p[(ax + 2) % 3] = s2 * w
                        pts.append(p)
    else:  # pragma: no cover - no order here uses code 5
        raise ValueError(f"unsupported orbit code {code}")
    pts = np.asarray(pts)
    return pts, np.full(len(pts), v)


# (code, a, v) per orbit; a is unused for codes 0-2
_LEBEDEV_ORBITS = {
    6: [(0, 0.0, 0.1666666666666667)],
    14: [(0, 0.0, 0.6666666666666667e-1), (2, 0.0, 0.75e-1)],
    26: [
        (0, 0.0, 0.4761904761904762e-1),
        (1, 0.0, 0.3809523809523810e-1),
        (2, 0.0, 0.3214285714285714e-1),
    ],
    38: [
        (0, 0.0, 0.9523809523809524e-2),
        (2, 0.0, 0.3214285714285714e-1),
        (4, 0.4597008433809831, 0.2857142857142857e-1),
    ],
    50: [
        (0, 0.0, 0.1269841269841270e-1),
        (1, 0.0, 0.2257495590828924e-1),
        (2, 0.0, 0.2109375e-1),
        (3, 0.3015113445777636, 0.2017333553791887e-1),
    ],
    74: [
        (0, 0.0, 0.5130671797338464e-3),
        (1, 0.0, 0.1660406956574204e-1),
        (2, 0.0, -0.2958603896103896e-1),
        (3, 0.4803844614152614, 0.2657620708215946e-1),
        (4, 0.3207726489807764, 0.1652217099371571e-1),
    ],
    86: [
        (0, 0.0, 0.1154401154401154e-1),
        (2, 0.0, 0.1194390908585628e-1),
        (3, 0.3696028464541502, 0.1111055571060340e-1),
        (3, 0.6943540066026664, 0.1187650129453714e-1),
        (4, 0.3742430390903412, 0.1181230374690448e-1),
    ],
    110: [
        (0, 0.0, 0.3828270494937162e-2),
        (2, 0.0, 0.9793737512487512e-2),
        (3, 0.1851156353447362, 0.8211737283191111e-2),
        (3, 0.6904210483822922, 0.9942814891178103e-2),
        (3, 0.3956894730559419, 0.9595471336070963e-2),
        (4, 0.4783690288121502, 0.9694996361663028e-2),
    ],
}

LEBEDEV_SIZES = tuple(sorted(_LEBEDEV_ORBITS))


@dataclass(frozen=True)
class SphereGrid:
    nodes: np.ndarray   # (m, 3) unit vectors
    weights: np.ndarray  # (m,), sum = 4*pi

    def __post_init__(self):
        if abs(self.weights.sum() - 4 * np.pi) > 1e-12 * 4 * np.pi:
            raise ValueError("sphere weights must sum to 4*pi")
        norms = np.linalg.norm(self.nodes, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-14:
            raise ValueError("sphere nodes must be unit vectors")

    @property
    def size(self) -> int:
        return len(self.weights)

    @classmethod
    def lebedev(cls, npoints: int = 26) -> "SphereGrid":
        if npoints not in _LEBEDEV_ORBITS:
            raise ValueError(
                f"no Lebedev rule with {npoints} points; available: {LEBEDEV_SIZES}"
            )
        all_pts, all_w = [], []
        for code, a, v in _LEBEDEV_ORBITS[npoints]:
            pts, w = _orbit(code, a, 0.0, v)
            all_pts.append(pts)
            all_w.append(w)
        nodes = np.vstack(all_pts)
        weights = np.concatenate(all_w) * 4 * np.pi
        # renormalize away the last-digit drift of the tabulated weights
        weights *= 4 * np.pi / weights.sum()
        if len(nodes) != npoints:
            raise AssertionError(f"orbit table for {npoints} produced {len(nodes)}")
        nodes /= np.linalg.norm(nodes, axis=1)[:, None]
        return cls(nodes=nodes, weights=weights)

    def integrate(self, values: np.ndarray) -> complex:
        """Quadrature of samples given at the nodes (last axis or 1-d)."""
        return np.tensordot(values, self.weights, axes=([values.ndim - 1], [0]))
