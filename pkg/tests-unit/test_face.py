import unittest
import math

import numpy as np

from lamp.errors import Location, LAMP_Error
from lamp.policy import Sensitiveness
from lamp.face import (FACE_DIMENSION, Face_Vector, Face_Record, Tolerance,
                       tolerance_for, distance, compare, Match,
                       Comparison_Counter, match_candidates,
                       Hash_Embedding_Provider)

from support import List_Handler


def unit(axis, scale=1.0):
    v = [0.0] * FACE_DIMENSION
    v[axis] = scale
    return Face_Vector(v)


class Test_Face_Vector(unittest.TestCase):
    def testDimension(self):
        for size in (0, 127, 129):
            with self.assertRaises(LAMP_Error) as ctx:
                Face_Vector([0.0] * size)
            self.assertEqual(ctx.exception.code, "DimensionMismatch")
        with self.assertRaises(LAMP_Error) as ctx:
            distance([0.0] * FACE_DIMENSION, [0.0, 1.0, 2.0])
        self.assertEqual(ctx.exception.code, "DimensionMismatch")

    def testNonFinite(self):
        components = [0.0] * FACE_DIMENSION
        components[5] = float("nan")
        with self.assertRaises(LAMP_Error) as ctx:
            Face_Vector(components)
        self.assertEqual(ctx.exception.code, "MalformedInput")

    def testReadOnly(self):
        vector = unit(0)
        with self.assertRaises(ValueError):
            vector.v[0] = 2.0

    def testJson(self):
        mh = List_Handler()
        location = Location("faces.json")
        record = Face_Record.from_json(mh, location,
                                       {"user"   : "alice",
                                        "vector" : [0.1] * FACE_DIMENSION})
        self.assertEqual(record.user, "alice")
        self.assertEqual(record.vector, Face_Vector([0.1] * FACE_DIMENSION))
        self.assertEqual(record.to_json()["vector"], [0.1] * FACE_DIMENSION)

        for obj, code in (({"user": "bob", "vector": "face"},
                           "MalformedInput"),
                          ({"user": "bob", "vector": [True] * 128},
                           "MalformedInput"),
                          ({"user": "bob", "vector": [0.0] * 12},
                           "DimensionMismatch"),
                          ({"user": "", "vector": [0.0] * 128},
                           "MalformedInput"),
                          ({"vector": [0.0] * 128},
                           "MalformedInput")):
            with self.assertRaises(LAMP_Error) as ctx:
                Face_Record.from_json(mh, location, obj)
            self.assertEqual(ctx.exception.code, code)


class Test_Distance(unittest.TestCase):
    def setUp(self):
        self.provider = Hash_Embedding_Provider()

    def testAgainstScalarLoop(self):
        for token in ("a", "b", "c", "d"):
            a = self.provider.encode(token)
            b = self.provider.encode(token + "'")
            expected = math.sqrt(sum((x - y) ** 2
                                     for x, y in zip(a.v, b.v)))
            self.assertAlmostEqual(distance(a, b), expected, delta=1e-12)

    def testOrthogonalUnits(self):
        self.assertEqual(distance(unit(0), unit(1)), math.sqrt(2))
        self.assertEqual(distance(unit(3), unit(3)), 0.0)

    def testMetric(self):
        vectors = [self.provider.encode("face %u" % n) for n in range(8)]
        for a in vectors:
            self.assertEqual(distance(a, a), 0.0)
            for b in vectors:
                self.assertEqual(distance(a, b), distance(b, a))
                for c in vectors:
                    self.assertLessEqual(distance(a, c),
                                         distance(a, b) + distance(b, c) +
                                         1e-12)

    def testCompareIsStrict(self):
        origin = Face_Vector([0.0] * FACE_DIMENSION)
        half = unit(0, 0.5)
        self.assertFalse(compare(origin, half, Tolerance(0.5)))
        self.assertTrue(compare(origin, half, Tolerance(0.5000001)))
        self.assertFalse(compare(origin, half, Tolerance(0.4999999)))

    def testTolerance(self):
        self.assertEqual(tolerance_for(Sensitiveness.HIGH), Tolerance(0.9))
        self.assertEqual(tolerance_for(Sensitiveness.LOW), Tolerance(0.6))
        self.assertEqual(tolerance_for(Sensitiveness.LOW, 0.3, 0.5),
                         Tolerance(0.3))
        self.assertLess(tolerance_for(Sensitiveness.LOW),
                        tolerance_for(Sensitiveness.HIGH))

    def testProvider(self):
        self.assertEqual(self.provider.encode("alice"),
                         Hash_Embedding_Provider().encode("alice"))
        self.assertAlmostEqual(float(np.linalg.norm(
            self.provider.encode("alice").v)), 1.0, delta=1e-12)
        base = self.provider.encode("alice")
        near = self.provider.perturb(base, 0.45, "noise")
        self.assertAlmostEqual(distance(base, near), 0.45, delta=1e-12)
        self.provider.register_photo("p1", ["alice", "bob"])
        self.assertEqual([idx for idx, _ in self.provider.detect("p1")],
                         [0, 1])
        self.assertEqual(self.provider.detect("unknown"), [])


class Test_Matching(unittest.TestCase):
    def setUp(self):
        self.provider = Hash_Embedding_Provider()

    def record(self, user):
        return Face_Record(user, self.provider.encode(user))

    def testSensitivenessDecidesTolerance(self):
        alice = self.record("alice")
        face = self.provider.perturb(alice.vector, 0.7, "blur")
        high = match_candidates([(0, face)],
                                [(alice, Sensitiveness.HIGH)])
        self.assertEqual([(m.face_index, m.user) for m in high],
                         [(0, "alice")])
        self.assertEqual(match_candidates([(0, face)],
                                          [(alice, Sensitiveness.LOW)]),
                         [])

    def testEmpty(self):
        self.assertEqual(match_candidates([], [(self.record("a"),
                                                Sensitiveness.HIGH)]),
                         [])
        self.assertEqual(match_candidates([(0, self.record("a").vector)],
                                          []),
                         [])

    def testSorted(self):
        users = [self.record(name) for name in ("zoe", "adam", "mia")]
        faces = [(1, self.provider.perturb(users[0].vector, 0.1, "x")),
                 (0, self.provider.perturb(users[2].vector, 0.1, "y")),
                 (2, self.provider.perturb(users[1].vector, 0.1, "z"))]
        rv = match_candidates(faces, [(user, Sensitiveness.LOW)
                                      for user in users])
        self.assertEqual([(m.face_index, m.user) for m in rv],
                         [(0, "mia"), (1, "zoe"), (2, "adam")])
        for match in rv:
            self.assertIsInstance(match, Match)
            self.assertAlmostEqual(match.distance, 0.1, delta=1e-12)

    def testParallelEqualsSequential(self):
        candidates = []
        for n in range(5000):
            xi = Sensitiveness.HIGH if n % 3 else Sensitiveness.LOW
            candidates.append((self.record("user%u" % n), xi))
        offsets = (0.3, 0.4, 0.5, 0.65, 0.7, 0.85)
        faces = []
        for idx in range(18):
            if idx < 6:
                # user2100 is Low, so offset 0.65 is out of reach
                target = candidates[idx * 700][0].vector
                faces.append((idx, self.provider.perturb(target,
                                                         offsets[idx],
                                                         "f%u" % idx)))
            else:
                faces.append((idx, self.provider.encode("stranger%u" %
                                                        idx)))

        sequential = Comparison_Counter()
        parallel = Comparison_Counter()
        expected = match_candidates(faces, candidates, counter=sequential)
        found = match_candidates(faces, candidates, workers=4,
                                 counter=parallel)
        self.assertEqual(found, expected)
        self.assertEqual(sequential.count, 18 * 5000)
        self.assertEqual(parallel.count, 90000)
        self.assertEqual(len(expected), 5)

    def testHighMatchesSupersetOfLow(self):
        rng = np.random.default_rng(5)
        records = [self.record("user%u" % n) for n in range(30)]
        faces = []
        for idx in range(60):
            target = records[int(rng.integers(len(records)))].vector
            faces.append((idx,
                          self.provider.perturb(target,
                                                float(rng.uniform(0.0, 1.2)),
                                                "m%u" % idx)))
        for low, high in ((0.6, 0.9), (0.3, 0.31), (0.5, 1.1)):
            matched = {}
            for xi in (Sensitiveness.LOW, Sensitiveness.HIGH):
                matched[xi] = {(m.face_index, m.user)
                               for m in match_candidates(
                                   faces,
                                   [(record, xi) for record in records],
                                   tolerance_low  = low,
                                   tolerance_high = high)}
            self.assertTrue(matched[Sensitiveness.LOW] <=
                            matched[Sensitiveness.HIGH])
            self.assertTrue(matched[Sensitiveness.LOW])
