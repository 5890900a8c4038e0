import unittest
import random
import threading

from lamp.errors import Location, LAMP_Error, Redactor_Failure, Kind
from lamp.policy import Sensitiveness, Lampi_Policy
from lamp.taxonomy import Semantic_Taxonomy
from lamp.dlp import DLP_Tree, Photo_Location, naive_scan
from lamp.face import (Face_Record, Hash_Embedding_Provider, distance,
                       tolerance_for, Comparison_Counter)
from lamp.enforcement import (Photo_Manifest, Redaction_Decision,
                              Recording_Redactor, Redactor, Photo_Locks,
                              manifest_from_json, check_photo, enforce)

from support import (List_Handler, address, exact_policy, semantic_policy,
                     date_range, at, random_interval, random_timestamp,
                     edge_timestamp)


def with_xi(policy, xi):
    return Lampi_Policy(pid      = policy.pid,
                        owner    = policy.owner,
                        loc      = policy.loc,
                        typ      = policy.typ,
                        interval = policy.interval,
                        xi       = xi)


class Failing_Redactor(Redactor):
    def apply(self, photo_id, decisions):
        raise RuntimeError("storage offline")


class Enforcement_Test(unittest.TestCase):
    def setUp(self):
        self.mh = List_Handler()
        self.taxonomy = Semantic_Taxonomy.create_default(self.mh)
        self.tree = DLP_Tree(self.taxonomy)
        self.provider = Hash_Embedding_Provider()
        self.records = {}

    def enroll(self, *users):
        for user in users:
            self.records[user] = Face_Record(user,
                                             self.provider.encode(user))

    def face_of(self, user, offset, noise="noise"):
        return self.provider.perturb(self.records[user].vector, offset,
                                     noise)

    def manifest(self, faces, uploader="carol", keywords=("university",),
                 timestamp="2019-12-01T14:00:00"):
        return Photo_Manifest(
            photo_id = "photo-1",
            location = Photo_Location(
                at(timestamp),
                address  = address("universite paris diderot"),
                keywords = keywords),
            faces    = list(enumerate(faces)),
            uploader = uploader)

    def decisions(self, manifest):
        result = check_photo(self.mh, manifest, self.tree, self.records)
        return [(d.face_index, d.protected_user, d.triggering_policy)
                for d in result.decisions]


class Test_Check_Photo(Enforcement_Test):
    def setUp(self):
        super().setUp()
        # Bob protects all of Paris for a month, Alice her university
        self.enroll("alice", "bob")
        self.tree.insert(self.mh,
                         exact_policy(1, "bob", address("", city="paris"),
                                      date_range("2019-11-15", "2019-12-15"),
                                      Sensitiveness.LOW))
        self.tree.insert(self.mh,
                         exact_policy(2, "alice",
                                      address("Universite Paris Diderot")))

    def testScenario(self):
        manifest = self.manifest([self.face_of("alice", 0.3),
                                  self.provider.encode("stranger")])
        self.assertEqual(self.tree.lookup(manifest.location), {1, 2})
        self.assertEqual(self.decisions(manifest), [(0, "alice", 2)])
        self.assertEqual(self.mh.messages, [])

    def testRemovalReleasesProtection(self):
        manifest = self.manifest([self.face_of("alice", 0.3)])
        self.tree.remove(self.mh, 2)
        self.assertEqual(self.decisions(manifest), [])

    def testOutsideInterval(self):
        manifest = self.manifest([self.face_of("bob", 0.1)],
                                 timestamp="2019-12-16T09:00:00")
        self.assertEqual(self.decisions(manifest), [])
        manifest = self.manifest([self.face_of("bob", 0.1)])
        self.assertEqual(self.decisions(manifest), [(0, "bob", 1)])

    def testEqualProtection(self):
        faces = [self.face_of("bob", 0.2), self.face_of("alice", 0.5)]
        expected = self.decisions(self.manifest(faces, uploader="carol"))
        self.assertEqual(expected, [(0, "bob", 1), (1, "alice", 2)])
        for uploader in ("alice", "bob"):
            self.assertEqual(self.decisions(self.manifest(faces,
                                                          uploader)),
                             expected)

    def testStrictestPolicy(self):
        self.tree.insert(self.mh,
                         semantic_policy(3, "alice", "education",
                                         xi=Sensitiveness.LOW))
        self.assertEqual(self.decisions(self.manifest(
            [self.face_of("alice", 0.4)])),
                         [(0, "alice", 3)])
        self.assertEqual(self.decisions(self.manifest(
            [self.face_of("alice", 0.7)])),
                         [(0, "alice", 2)])

    def testToleranceBoundary(self):
        high = tolerance_for(Sensitiveness.HIGH).max_distance
        low = tolerance_for(Sensitiveness.LOW).max_distance
        inside = self.face_of("alice", high - 1e-6)
        outside = self.face_of("alice", high + 1e-6)
        self.assertLess(distance(inside, self.records["alice"].vector), high)
        self.assertEqual(self.decisions(self.manifest([inside, outside])),
                         [(0, "alice", 2)])
        self.assertEqual(self.decisions(self.manifest(
            [self.face_of("bob", low - 1e-6),
             self.face_of("bob", low + 1e-6)])),
                         [(0, "bob", 1)])

    def testMissingEnrollment(self):
        self.tree.insert(self.mh, semantic_policy(3, "dave", "university"))
        result = check_photo(self.mh,
                             self.manifest([self.face_of("alice", 0.1)]),
                             self.tree, self.records)
        self.assertEqual(result.diagnostics,
                         ["policy 3: owner dave has no enrolled face vector"])
        _, kind, message, _ = self.mh.pop_message()
        self.assertEqual(kind, Kind.SYS_WARNING)
        self.assertEqual(message, result.diagnostics[0])
        self.assertEqual(len(result.decisions), 1)

    def testResultJson(self):
        result = check_photo(self.mh,
                             self.manifest([self.face_of("alice", 0.25)]),
                             self.tree, self.records,
                             counter=Comparison_Counter())
        self.assertEqual(sorted(result.timings), ["matching", "retrieval"])
        data = result.to_json(include_timings=False)
        self.assertEqual(sorted(data), ["decisions", "diagnostics"])
        decision = data["decisions"][0]
        self.assertEqual(decision["action"], "ReplaceFace")
        self.assertEqual(decision["protected_user"], "alice")
        self.assertAlmostEqual(decision["distance"], 0.25, delta=1e-12)


class Test_Enforce(Enforcement_Test):
    def setUp(self):
        super().setUp()
        self.enroll("alice")
        self.tree.insert(self.mh, semantic_policy(7, "alice", "university"))

    def testRecordingRedactor(self):
        redactor = Recording_Redactor()
        manifest = self.manifest([self.face_of("alice", 0.2),
                                  self.face_of("alice", 0.3, "other")])
        report = enforce(self.mh, manifest, redactor, self.tree,
                         self.records, photo_locks=Photo_Locks())
        self.assertEqual(report.ack, {"photo_id": "photo-1", "replaced": 2})
        self.assertEqual(redactor.applied["photo-1"], report.decisions)
        self.assertIn("redaction", report.timings)
        data = report.to_json(include_timings=False)
        self.assertEqual(sorted(data), ["decisions", "diagnostics",
                                        "photo_id", "redactor_ack"])

        # Applying again leaves the same state behind
        again = enforce(self.mh, manifest, redactor, self.tree, self.records)
        self.assertEqual(again.decisions, report.decisions)
        self.assertEqual(len(redactor.applied), 1)

    def testRedactorFailure(self):
        manifest = self.manifest([self.face_of("alice", 0.2)])
        with self.assertRaises(Redactor_Failure) as ctx:
            enforce(self.mh, manifest, Failing_Redactor(), self.tree,
                    self.records)
        self.assertEqual(ctx.exception.code, "RedactorFailure")
        self.assertEqual(ctx.exception.message,
                         "redactor failed: storage offline")
        self.assertEqual(ctx.exception.decisions,
                         [Redaction_Decision(0, "alice", 7,
                                             distance(
                                                 manifest.faces[0][1],
                                                 self.records["alice"].vector
                                             ))])

    def testPhotoLocks(self):
        locks = Photo_Locks()
        with locks.held("a"):
            with locks.held("b"):
                self.assertEqual(sorted(locks.locks), ["a", "b"])
            self.assertEqual(list(locks.locks), ["a"])
        self.assertEqual(locks.locks, {})

    def testPhotoLocksExclude(self):
        locks = Photo_Locks()
        entered = threading.Event()

        def contend():
            with locks.held("a"):
                entered.set()

        with locks.held("a"):
            thread = threading.Thread(target=contend)
            thread.start()
            self.assertFalse(entered.wait(0.2))
            self.assertEqual(locks.locks["a"][1], 2)
        thread.join(5)
        self.assertTrue(entered.is_set())
        self.assertEqual(locks.locks, {})

    def testPhotoLocksReleasedOnFailure(self):
        locks = Photo_Locks()
        manifest = self.manifest([self.face_of("alice", 0.2)])
        with self.assertRaises(Redactor_Failure):
            enforce(self.mh, manifest, Failing_Redactor(), self.tree,
                    self.records, photo_locks=locks)
        self.assertEqual(locks.locks, {})


class Test_Oracle(Enforcement_Test):
    users = ["user%u" % n for n in range(12)]
    places = [address("street %u" % n) for n in range(4)] + \
        [address("", city="paris")]
    keywords = ["bar", "pub", "university", "entertainment", "any place"]

    def random_policies(self, rng, n_policies):
        rv = []
        for pid in range(1, n_policies + 1):
            xi = rng.choice((Sensitiveness.HIGH, Sensitiveness.LOW))
            if rng.random() < 0.5:
                policy = exact_policy(pid, rng.choice(self.users),
                                      rng.choice(self.places),
                                      random_interval(rng), xi)
            else:
                policy = semantic_policy(pid, rng.choice(self.users),
                                         rng.choice(self.keywords),
                                         random_interval(rng), xi)
            rv.append(policy)
        return rv

    def random_manifest(self, rng, name, policies):
        faces = []
        for _ in range(rng.randrange(1, 6)):
            if rng.random() < 0.7:
                faces.append(self.face_of(rng.choice(self.users[:10]),
                                          rng.uniform(0.0, 1.0),
                                          "n%s" % name))
            else:
                faces.append(self.provider.encode("x%s" % name))
        if rng.random() < 0.5:
            when = random_timestamp(rng)
        else:
            when = edge_timestamp(rng, rng.choice(policies).interval)
        return Photo_Manifest(
            photo_id = "p%s" % name,
            location = Photo_Location(
                when,
                address  = rng.choice(self.places[:4]),
                keywords = rng.sample(["bar", "pub", "park"], 1)),
            faces    = list(enumerate(faces)),
            uploader = rng.choice(self.users))

    def brute_force(self, manifest):
        expected = {}
        for pid in naive_scan(self.tree.policies.values(),
                              manifest.location, self.taxonomy):
            policy = self.tree.policies[pid]
            record = self.records.get(policy.owner)
            if record is None:
                continue
            tol = tolerance_for(policy.xi).max_distance
            for idx, face in manifest.faces:
                if distance(face, record.vector) < tol:
                    key = (idx, policy.owner)
                    expected[key] = min(expected.get(key, (tol, pid)),
                                        (tol, pid))
        return [key + (expected[key][1],) for key in sorted(expected)]

    def testAgainstBruteForce(self):
        self.enroll(*self.users[:10])
        for seed in range(3):
            rng = random.Random(1234 + seed)
            self.tree = DLP_Tree(self.taxonomy)
            policies = self.random_policies(rng, 40)
            for policy in policies:
                self.tree.insert(self.mh, policy)
            for n in range(1000):
                manifest = self.random_manifest(rng, "%u-%u" % (seed, n),
                                                policies)
                self.assertEqual(self.decisions(manifest),
                                 self.brute_force(manifest))

    def testRaisingSensitivenessKeepsDecisions(self):
        self.enroll(*self.users[:10])
        rng = random.Random(99)
        policies = [with_xi(policy, Sensitiveness.LOW)
                    for policy in self.random_policies(rng, 20)]
        manifests = [self.random_manifest(rng, n, policies)
                     for n in range(30)]
        for policy in policies:
            self.tree.insert(self.mh, policy)

        for policy in policies:
            before = [self.decisions(manifest) for manifest in manifests]
            self.tree.remove(self.mh, policy.pid)
            self.tree.insert(self.mh, with_xi(policy, Sensitiveness.HIGH))
            after = [self.decisions(manifest) for manifest in manifests]
            for old, new in zip(before, after):
                self.assertTrue({d[:2] for d in old} <= {d[:2] for d in new},
                                (policy.pid, old, new))


class Test_Manifest_Json(unittest.TestCase):
    def setUp(self):
        self.mh = List_Handler()
        self.location = Location("manifest.json")
        self.vector = [0.0] * 128

    def parse(self, **changes):
        obj = {"photo_id" : "p1",
               "uploader" : "bob",
               "location" : {"street"    : "Universite Paris Diderot",
                             "city"      : "Paris",
                             "state"     : "Ile-de-France",
                             "nation"    : "France",
                             "keywords"  : ["University"],
                             "timestamp" : "2019-12-01T14:00:00"},
               "faces"    : [{"index": 0, "vector": self.vector}]}
        obj.update(changes)
        return manifest_from_json(self.mh, obj, self.location)

    def expectError(self, code, **changes):
        with self.assertRaises(LAMP_Error) as ctx:
            self.parse(**changes)
        self.assertEqual(ctx.exception.code, code)

    def testParse(self):
        manifest = self.parse()
        self.assertEqual(manifest.location.address,
                         address("universite paris diderot"))
        self.assertEqual(manifest.location.keywords, ["university"])
        self.assertEqual(manifest.location.timestamp,
                         at("2019-12-01T14:00:00"))
        self.assertEqual([idx for idx, _ in manifest.faces], [0])

    def testPointOnly(self):
        manifest = self.parse(location={"lat"       : 48.8275,
                                        "lon"       : 2.38,
                                        "timestamp" : "2019-12-01T14:00"})
        self.assertIsNone(manifest.location.address)
        self.assertEqual(manifest.location.point.lat, 48.8275)

    def testErrors(self):
        self.expectError("MalformedAddress",
                         location={"street"    : "rue x",
                                   "nation"    : "france",
                                   "timestamp" : "2019-12-01T14:00"})
        self.expectError("MalformedInput",
                         location={"timestamp": "2019-12-01T14:00"})
        self.expectError("MalformedInput",
                         location={"keywords"  : ["bar"],
                                   "timestamp" : "noon"})
        self.expectError("MalformedInput",
                         faces=[{"index": 1, "vector": self.vector}])
        self.expectError("DimensionMismatch",
                         faces=[{"index": 0, "vector": [0.0] * 64}])
        self.expectError("MalformedInput", uploader=3)
