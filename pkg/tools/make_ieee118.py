"""Generate the bundled IEEE 118-bus grid fixture.

Branch parameters follow the standard 118-bus test case (per-unit r, x,
total line charging b); the nine tap-changing transformers carry x only.
Lengths are synthesized from reactance at load time, so none are written.
"""

import json
from pathlib import Path

GENERATOR_BUSES = [
    1, 4, 6, 8, 10, 12, 15, 18, 19, 24, 25, 26, 27, 31, 32, 34, 36, 40, 42,
    46, 49, 54, 55, 56, 59, 61, 62, 65, 66, 69, 70, 72, 73, 74, 76, 77, 80,
    85, 87, 89, 90, 91, 92, 99, 100, 103, 104, 105, 107, 110, 111, 112, 113, 116,
]

# (from, to, r, x, b)
LINES = [
    (1, 2, 0.0303, 0.0999, 0.0254),
    (1, 3, 0.0129, 0.0424, 0.01082),
    (4, 5, 0.00176, 0.00798, 0.0021),
    (3, 5, 0.0241, 0.108, 0.0284),
    (5, 6, 0.0119, 0.054, 0.01426),
    (6, 7, 0.00459, 0.0208, 0.0055),
    (8, 9, 0.00244, 0.0305, 1.162),
    (9, 10, 0.00258, 0.0322, 1.23),
    (4, 11, 0.0209, 0.0688, 0.01748),
    (5, 11, 0.0203, 0.0682, 0.01738),
    (11, 12, 0.00595, 0.0196, 0.00502),
    (2, 12, 0.0187, 0.0616, 0.01572),
    (3, 12, 0.0484, 0.16, 0.0406),
    (7, 12, 0.00862, 0.034, 0.00874),
    (11, 13, 0.02225, 0.0731, 0.01876),
    (12, 14, 0.0215, 0.0707, 0.01816),
    (13, 15, 0.0744, 0.2444, 0.06268),
    (14, 15, 0.0595, 0.195, 0.0502),
    (12, 16, 0.0212, 0.0834, 0.0214),
    (15, 17, 0.0132, 0.0437, 0.0444),
    (16, 17, 0.0454, 0.1801, 0.0466),
    (17, 18, 0.0123, 0.0505, 0.01298),
    (18, 19, 0.01119, 0.0493, 0.01142),
    (19, 20, 0.0252, 0.117, 0.0298),
    (15, 19, 0.012, 0.0394, 0.0101),
    (20, 21, 0.0183, 0.0849, 0.0216),
    (21, 22, 0.0209, 0.097, 0.0246),
    (22, 23, 0.0342, 0.159, 0.0404),
    (23, 24, 0.0135, 0.0492, 0.0498),
    (23, 25, 0.0156, 0.08, 0.0864),
    (25, 27, 0.0318, 0.163, 0.1764),
    (27, 28, 0.01913, 0.0855, 0.0216),
    (28, 29, 0.0237, 0.0943, 0.0238),
    (8, 30, 0.00431, 0.0504, 0.514),
    (26, 30, 0.00799, 0.086, 0.908),
    (17, 31, 0.0474, 0.1563, 0.0399),
    (29, 31, 0.0108, 0.0331, 0.0083),
    (23, 32, 0.0317, 0.1153, 0.1173),
    (31, 32, 0.0298, 0.0985, 0.0251),
    (27, 32, 0.0229, 0.0755, 0.01926),
    (15, 33, 0.038, 0.1244, 0.03194),
    (19, 34, 0.0752, 0.247, 0.0632),
    (35, 36, 0.00224, 0.0102, 0.00268),
    (35, 37, 0.011, 0.0497, 0.01318),
    (33, 37, 0.0415, 0.142, 0.0366),
    (34, 36, 0.00871, 0.0268, 0.00568),
    (34, 37, 0.00256, 0.0094, 0.00984),
    (37, 39, 0.0321, 0.106, 0.027),
    (37, 40, 0.0593, 0.168, 0.042),
    (30, 38, 0.00464, 0.054, 0.422),
    (39, 40, 0.0184, 0.0605, 0.01552),
    (40, 41, 0.0145, 0.0487, 0.01222),
    (40, 42, 0.0555, 0.183, 0.0466),
    (41, 42, 0.041, 0.135, 0.0344),
    (43, 44, 0.0608, 0.2454, 0.06068),
    (34, 43, 0.0413, 0.1681, 0.04226),
    (44, 45, 0.0224, 0.0901, 0.0224),
    (45, 46, 0.04, 0.1356, 0.0332),
    (46, 47, 0.038, 0.127, 0.0316),
    (46, 48, 0.0601, 0.189, 0.0472),
    (47, 49, 0.0191, 0.0625, 0.01604),
    (42, 49, 0.0715, 0.323, 0.086),
    (42, 49, 0.0715, 0.323, 0.086),
    (45, 49, 0.0684, 0.186, 0.0444),
    (48, 49, 0.0179, 0.0505, 0.01258),
    (49, 50, 0.0267, 0.0752, 0.01874),
    (49, 51, 0.0486, 0.137, 0.0342),
    (51, 52, 0.0203, 0.0588, 0.01396),
    (52, 53, 0.0405, 0.1635, 0.04058),
    (53, 54, 0.0263, 0.122, 0.031),
    (49, 54, 0.073, 0.289, 0.0738),
    (49, 54, 0.0869, 0.291, 0.073),
    (54, 55, 0.0169, 0.0707, 0.0202),
    (54, 56, 0.00275, 0.00955, 0.00732),
    (55, 56, 0.00488, 0.0151, 0.00374),
    (56, 57, 0.0343, 0.0966, 0.0242),
    (50, 57, 0.0474, 0.134, 0.0332),
    (56, 58, 0.0343, 0.0966, 0.0242),
    (51, 58, 0.0255, 0.0719, 0.01788),
    (54, 59, 0.0503, 0.2293, 0.0598),
    (56, 59, 0.0825, 0.251, 0.0569),
    (56, 59, 0.0803, 0.239, 0.0536),
    (55, 59, 0.04739, 0.2158, 0.05646),
    (59, 60, 0.0317, 0.145, 0.0376),
    (59, 61, 0.0328, 0.15, 0.0388),
    (60, 61, 0.00264, 0.0135, 0.01456),
    (60, 62, 0.0123, 0.0561, 0.01468),
    (61, 62, 0.00824, 0.0376, 0.0098),
    (63, 64, 0.00172, 0.02, 0.216),
    (38, 65, 0.00901, 0.0986, 1.046),
    (64, 65, 0.00269, 0.0302, 0.38),
    (49, 66, 0.018, 0.0919, 0.0248),
    (49, 66, 0.018, 0.0919, 0.0248),
    (62, 66, 0.0482, 0.218, 0.0578),
    (62, 67, 0.0258, 0.117, 0.031),
    (66, 67, 0.0224, 0.1015, 0.02682),
    (65, 68, 0.00138, 0.016, 0.638),
    (47, 69, 0.0844, 0.2778, 0.07092),
    (49, 69, 0.0985, 0.324, 0.0828),
    (69, 70, 0.03, 0.127, 0.122),
    (24, 70, 0.00221, 0.4115, 0.10198),
    (70, 71, 0.00882, 0.0355, 0.00878),
    (24, 72, 0.0488, 0.196, 0.0488),
    (71, 72, 0.0446, 0.18, 0.04444),
    (71, 73, 0.00866, 0.0454, 0.01178),
    (70, 74, 0.0401, 0.1323, 0.03368),
    (70, 75, 0.0428, 0.141, 0.036),
    (69, 75, 0.0405, 0.122, 0.124),
    (74, 75, 0.0123, 0.0406, 0.01034),
    (76, 77, 0.0444, 0.148, 0.0368),
    (69, 77, 0.0309, 0.101, 0.1038),
    (75, 77, 0.0601, 0.1999, 0.04978),
    (77, 78, 0.00376, 0.0124, 0.01264),
    (78, 79, 0.00546, 0.0244, 0.00648),
    (77, 80, 0.017, 0.0485, 0.0472),
    (77, 80, 0.0294, 0.105, 0.0228),
    (79, 80, 0.0156, 0.0704, 0.0187),
    (68, 81, 0.00175, 0.0202, 0.808),
    (77, 82, 0.0298, 0.0853, 0.08174),
    (82, 83, 0.0112, 0.03665, 0.03796),
    (83, 84, 0.0625, 0.132, 0.0258),
    (83, 85, 0.043, 0.148, 0.0348),
    (84, 85, 0.0302, 0.0641, 0.01234),
    (85, 86, 0.035, 0.123, 0.0276),
    (86, 87, 0.02828, 0.2074, 0.0445),
    (85, 88, 0.02, 0.102, 0.0276),
    (85, 89, 0.0239, 0.173, 0.047),
    (88, 89, 0.0139, 0.0712, 0.01934),
    (89, 90, 0.0518, 0.188, 0.0528),
    (89, 90, 0.0238, 0.0997, 0.106),
    (90, 91, 0.0254, 0.0836, 0.0214),
    (89, 92, 0.0099, 0.0505, 0.0548),
    (89, 92, 0.0393, 0.1581, 0.0414),
    (91, 92, 0.0387, 0.1272, 0.03268),
    (92, 93, 0.0258, 0.0848, 0.0218),
    (92, 94, 0.0481, 0.158, 0.0406),
    (93, 94, 0.0223, 0.0732, 0.01876),
    (94, 95, 0.0132, 0.0434, 0.0111),
    (80, 96, 0.0356, 0.182, 0.0494),
    (82, 96, 0.0162, 0.053, 0.0544),
    (94, 96, 0.0269, 0.0869, 0.023),
    (80, 97, 0.0183, 0.0934, 0.0254),
    (80, 98, 0.0238, 0.108, 0.0286),
    (80, 99, 0.0454, 0.206, 0.0546),
    (92, 100, 0.0648, 0.295, 0.0472),
    (94, 100, 0.0178, 0.058, 0.0604),
    (95, 96, 0.0171, 0.0547, 0.01474),
    (96, 97, 0.0173, 0.0885, 0.024),
    (98, 100, 0.0397, 0.179, 0.0476),
    (99, 100, 0.018, 0.0813, 0.0216),
    (100, 101, 0.0277, 0.1262, 0.0328),
    (92, 102, 0.0123, 0.0559, 0.01464),
    (101, 102, 0.0246, 0.112, 0.0294),
    (100, 103, 0.016, 0.0525, 0.0536),
    (100, 104, 0.0451, 0.204, 0.0541),
    (103, 104, 0.0466, 0.1584, 0.0407),
    (103, 105, 0.0535, 0.1625, 0.0408),
    (100, 106, 0.0605, 0.229, 0.062),
    (104, 105, 0.00994, 0.0378, 0.00986),
    (105, 106, 0.014, 0.0547, 0.01434),
    (105, 107, 0.053, 0.183, 0.0472),
    (105, 108, 0.0261, 0.0703, 0.01844),
    (106, 107, 0.053, 0.183, 0.0472),
    (108, 109, 0.0105, 0.0288, 0.0076),
    (103, 110, 0.03906, 0.1813, 0.0461),
    (109, 110, 0.0278, 0.0762, 0.0202),
    (110, 111, 0.022, 0.0755, 0.02),
    (110, 112, 0.0247, 0.064, 0.062),
    (17, 113, 0.00913, 0.0301, 0.00768),
    (32, 113, 0.0615, 0.203, 0.0518),
    (32, 114, 0.0135, 0.0612, 0.01628),
    (27, 115, 0.0164, 0.0741, 0.01972),
    (114, 115, 0.0023, 0.0104, 0.00276),
    (68, 116, 0.00034, 0.00405, 0.164),
    (12, 117, 0.0329, 0.14, 0.0358),
    (75, 118, 0.0145, 0.0481, 0.01198),
    (76, 118, 0.0164, 0.0544, 0.01356),
]

# (from, to, x)
TRANSFORMERS = [
    (8, 5, 0.0267),
    (26, 25, 0.0382),
    (30, 17, 0.0388),
    (38, 37, 0.0375),
    (63, 59, 0.0386),
    (64, 61, 0.0268),
    (65, 66, 0.037),
    (68, 69, 0.037),
    (81, 80, 0.037),
]

# Buses carrying PMUs (converted to substation ids below); chosen to spread
# coverage while keeping the shipped failure scenarios' neighborhoods clear.
PMU_BUSES = [
    6, 10, 12, 20, 23, 27, 29, 32, 34, 37, 40, 44, 46, 49, 52, 56, 59, 62,
    65, 70, 72, 75, 77, 80, 94, 109, 111, 113, 116, 118,
]

# Substation-level homing overrides, expressed by contained bus: the fiber
# from bus 88's substation follows the corridor to bus 85's, and bus 101's
# runs toward bus 92's, regardless of line length.
SADM_HOMING_BUS = {88: 85, 101: 92}


def substation_map(pairs):
    parent = {b: b for b in range(1, 119)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, _ in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for b in range(1, 119):
        groups.setdefault(find(b), []).append(b)
    sub_of = {}
    for sub_id, (_, buses) in enumerate(sorted(groups.items()), start=1):
        for b in buses:
            sub_of[b] = sub_id
    return sub_of


def main():
    gens = set(GENERATOR_BUSES)
    branches = []
    for f, t, r, x, b in LINES:
        branches.append({"from": f, "to": t, "r": r, "x": x, "b": b})
    for f, t, x in TRANSFORMERS:
        branches.append({"from": f, "to": t, "r": 0.0, "x": x, "b": 0.0, "transformer": True})
    branches.sort(key=lambda e: (e["from"], e["to"]))

    sub_of = substation_map(TRANSFORMERS)
    pmu_subs = sorted({sub_of[b] for b in PMU_BUSES})
    sadm_homing = {str(sub_of[b]): sub_of[h] for b, h in SADM_HOMING_BUS.items()}

    payload = {
        "version": 1,
        "name": "ieee118",
        "buses": [{"id": b, "generator": b in gens} for b in range(1, 119)],
        "branches": branches,
        "pmu_substations": pmu_subs,
        "sadm_homing": sadm_homing,
    }
    out = Path(__file__).resolve().parent.parent / "src" / "jointgrid" / "fixtures" / "ieee118.json"
    out.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out}: {len(branches)} branches, PMU substations {pmu_subs}")
    print("substation of bus 85:", sub_of[85], "| bus 95:", sub_of[95], "| bus 12:", sub_of[12])


if __name__ == "__main__":
    main()
