import unittest
import io
import os
import random
import tempfile
import json
import threading
import urllib.request
import urllib.error
from contextlib import redirect_stdout

from lamp.errors import Kind
from lamp.config import Engine_Config
from lamp.engine import Engine
from lamp.enforcement import Redactor
from lamp.face import Hash_Embedding_Provider
from lamp.server import create_server
from lamp.version import LAMP_VERSION
from lamp.lamp import main, EXIT_OK

from support import List_Handler


class Jammed_Redactor(Redactor):
    def apply(self, photo_id, decisions):
        raise OSError("jammed")


class Server_Test(unittest.TestCase):
    redactor = None

    def setUp(self):
        self.mh = List_Handler()
        self.engine = Engine(self.mh,
                             Engine_Config(data_dir=None, workers=1),
                             self.redactor)
        self.server = create_server(self.mh, self.engine, "127.0.0.1", 0)
        thread = threading.Thread(target=self.server.serve_forever)
        thread.daemon = True
        thread.start()
        self.addCleanup(self.server.server_close)
        self.addCleanup(self.server.shutdown)
        self.base = "http://%s:%u" % self.server.server_address[:2]
        self.provider = Hash_Embedding_Provider()

    def call(self, method, path, body=None):
        data = None if body is None else json.dumps(body).encode("UTF-8")
        request = urllib.request.Request(self.base + path,
                                         data=data,
                                         method=method)
        if data is not None:
            request.add_header("Content-Type", "application/json")
        try:
            with urllib.request.urlopen(request, timeout=10) as response:
                return response.status, json.loads(response.read())
        except urllib.error.HTTPError as err:
            return err.code, json.loads(err.read())

    def manifest(self, user):
        face = self.provider.perturb(self.provider.encode(user), 0.2, "n")
        return {"photo_id" : "photo-9",
                "uploader" : "zoe",
                "location" : {"keywords"  : ["pub"],
                              "timestamp" : "2019-03-17T22:00:00"},
                "faces"    : [{"index": 0, "vector": face.to_json()}]}

    def policy(self, pid, owner="alice", keyword="pub"):
        return {"pid"   : pid,
                "owner" : owner,
                "typ"   : "S",
                "loc"   : keyword,
                "int"   : {"time_start": "20:00", "time_end": "05:00"},
                "xi"    : "High"}

    def enroll(self, user):
        return self.call("POST", "/enroll",
                         {"user"   : user,
                          "vector" : self.provider.encode(user).to_json()})


class Test_Service(Server_Test):
    def testHealth(self):
        self.assertEqual(self.call("GET", "/healthz"),
                         (200, {"status"   : "ok",
                                "policies" : 0,
                                "enrolled" : 0,
                                "version"  : LAMP_VERSION}))

    def testPolicyLifecycle(self):
        self.assertEqual(self.call("POST", "/policies", self.policy(4)),
                         (201, {"pid": 4}))
        self.assertEqual(self.call("POST", "/policies",
                                   self.policy(3, "bob", "bar")),
                         (201, {"pid": 3}))
        status, body = self.call("POST", "/policies", self.policy(4))
        self.assertEqual((status, body["error"]), (409, "DuplicatePolicyId"))

        status, body = self.call("GET", "/policies")
        self.assertEqual([p["pid"] for p in body["policies"]], [3, 4])
        status, body = self.call("GET", "/policies?owner=bob")
        self.assertEqual([p["pid"] for p in body["policies"]], [3])

        self.assertEqual(self.call("DELETE", "/policies/3"),
                         (200, {"removed": 3}))
        status, body = self.call("DELETE", "/policies/3")
        self.assertEqual((status, body["error"]), (404, "UnknownPolicyId"))
        status, body = self.call("DELETE", "/policies/three")
        self.assertEqual((status, body["error"]), (400, "MalformedInput"))

    def testValidationErrors(self):
        status, body = self.call("POST", "/policies",
                                 self.policy(5, keyword="karaoke"))
        self.assertEqual((status, body["error"]), (400, "UnknownKeyword"))
        status, body = self.call("POST", "/policies", [1, 2])
        self.assertEqual((status, body["error"]), (400, "MalformedInput"))
        status, body = self.call("POST", "/enroll",
                                 {"user": "x", "vector": [0.5]})
        self.assertEqual((status, body["error"]), (400, "DimensionMismatch"))

    def testUnknownRoute(self):
        status, body = self.call("GET", "/nowhere")
        self.assertEqual((status, body["error"]), (404, "NotFound"))
        status, body = self.call("DELETE", "/healthz")
        self.assertEqual(status, 404)

    def testCheckAndEnforce(self):
        self.call("POST", "/policies", self.policy(1))
        self.assertEqual(self.enroll("alice"), (200, {"enrolled": ["alice"]}))

        status, body = self.call("POST", "/check", self.manifest("alice"))
        self.assertEqual(status, 200)
        self.assertEqual([(d["face_index"], d["protected_user"],
                           d["triggering_policy"], d["action"])
                          for d in body["decisions"]],
                         [(0, "alice", 1, "ReplaceFace")])
        self.assertIn("retrieval", body["timings_ms"])

        status, body = self.call("POST", "/enforce", self.manifest("alice"))
        self.assertEqual(status, 200)
        self.assertEqual(body["redactor_ack"],
                         {"photo_id": "photo-9", "replaced": 1})
        self.assertEqual(len(self.engine.redactor.applied["photo-9"]), 1)

        status, body = self.call("POST", "/check", self.manifest("bob"))
        self.assertEqual(body["decisions"], [])

    def testUnexpectedFailure(self):
        def broken_check(mh, manifest):
            raise KeyError("photo index")
        self.engine.check_photo = broken_check

        status, body = self.call("POST", "/check", self.manifest("alice"))
        self.assertEqual((status, body),
                         (500, {"error"   : "IOFailure",
                                "message" : "internal error: 'photo index'"}))
        self.assertIn((Kind.SYS_WARNING, "internal error: 'photo index'"),
                      [(kind, message)
                       for _, kind, message, _ in self.mh.messages])

        # The service keeps answering
        self.assertEqual(self.call("GET", "/healthz")[0], 200)


class Test_Failing_Redactor(Server_Test):
    redactor = Jammed_Redactor()

    def testDecisionsSurvive(self):
        self.call("POST", "/policies", self.policy(1))
        self.enroll("alice")
        status, body = self.call("POST", "/enforce", self.manifest("alice"))
        self.assertEqual(status, 502)
        self.assertEqual(body["error"], "RedactorFailure")
        self.assertEqual([d["protected_user"] for d in body["decisions"]],
                         ["alice"])


class Test_Same_Decisions(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.data_dir = os.path.join(self.tmp.name, "data")
        self.provider = Hash_Embedding_Provider()

    def file(self, name, content):
        file_name = os.path.join(self.tmp.name, name)
        with open(file_name, "w", encoding="UTF-8") as fd:
            json.dump(content, fd)
        return file_name

    def run_lamp(self, *args):
        out = io.StringIO()
        with redirect_stdout(out):
            status = main(["--data-dir", self.data_dir, "--brief"] +
                          list(args))
        self.assertEqual(status, EXIT_OK, out.getvalue())
        return out.getvalue()

    def testCommandLineAndService(self):
        rng = random.Random(3)
        users = ["user%u" % n for n in range(6)]
        enrolled = {user: self.provider.encode(user) for user in users}
        keywords = ["bar", "pub", "university", "park"]
        policies = [{"pid"   : pid,
                     "owner" : rng.choice(users),
                     "typ"   : "S",
                     "loc"   : rng.choice(keywords),
                     "int"   : {"anytime": True},
                     "xi"    : rng.choice(["High", "Low"])}
                    for pid in range(1, 16)]
        self.run_lamp("policy", "add", self.file("policies.json", policies))
        self.run_lamp("enroll",
                      self.file("faces.json",
                                [{"user": user, "vector": vector.to_json()}
                                 for user, vector in enrolled.items()]))

        manifests = []
        for n in range(12):
            faces = []
            for idx in range(rng.randrange(1, 4)):
                faces.append(self.provider.perturb(enrolled[rng.choice(users)],
                                                   rng.uniform(0.0, 1.0),
                                                   "f%u-%u" % (n, idx)))
            manifests.append({
                "photo_id" : "photo-%u" % n,
                "uploader" : rng.choice(users),
                "location" : {"keywords"  : [rng.choice(keywords)],
                              "timestamp" : "2019-03-17T22:00:00"},
                "faces"    : [{"index": idx, "vector": face.to_json()}
                              for idx, face in enumerate(faces)]})

        from_cli = []
        for n, manifest in enumerate(manifests):
            output = self.run_lamp("check", "--no-timings",
                                   self.file("photo-%u.json" % n, manifest))
            from_cli.append(json.loads(output)["decisions"])
        self.assertTrue(any(from_cli))

        mh = List_Handler()
        engine = Engine(mh, Engine_Config(data_dir=self.data_dir,
                                          workers=1))
        server = create_server(mh, engine, "127.0.0.1", 0)
        thread = threading.Thread(target=server.serve_forever)
        thread.daemon = True
        thread.start()
        self.addCleanup(server.server_close)
        self.addCleanup(server.shutdown)
        url = "http://%s:%u/check" % server.server_address[:2]

        for manifest, expected in zip(manifests, from_cli):
            request = urllib.request.Request(
                url,
                data   = json.dumps(manifest).encode("UTF-8"),
                method = "POST")
            with urllib.request.urlopen(request, timeout=10) as response:
                self.assertEqual(json.loads(response.read())["decisions"],
                                 expected)
