import unittest

from lamp.errors import Location, LAMP_Error
from lamp.taxonomy import Semantic_Taxonomy, ROOT_KEYWORD, MAX_DEPTH

from support import List_Handler


class Test_Default_Taxonomy(unittest.TestCase):
    def setUp(self):
        self.mh = List_Handler()
        self.taxonomy = Semantic_Taxonomy.create_default(self.mh)

    def testShape(self):
        children = self.taxonomy.children()
        self.assertEqual(len(children[ROOT_KEYWORD]), 8)
        self.assertIn("bar", children["entertainment"])
        self.assertEqual(self.taxonomy.parent_of(ROOT_KEYWORD), None)
        for keyword in self.taxonomy.keywords():
            self.assertLessEqual(self.taxonomy.depth(keyword), MAX_DEPTH)

    def testAncestors(self):
        self.assertEqual(self.taxonomy.ancestors("sports bar"),
                         ["sports bar", "bar", "entertainment",
                          ROOT_KEYWORD])
        self.assertEqual(self.taxonomy.ancestors(ROOT_KEYWORD),
                         [ROOT_KEYWORD])
        self.assertEqual(self.taxonomy.depth("dental clinic"), 4)

    def testSuggest(self):
        self.assertEqual(self.taxonomy.suggest("hospitl"), "hospital")
        self.assertEqual(self.taxonomy.suggest("zzzzzzzz"), None)

    def testJsonRoundTrip(self):
        again = Semantic_Taxonomy.from_json(self.mh,
                                            self.taxonomy.to_json(),
                                            Location("default.json"))
        self.assertEqual(again.parents, self.taxonomy.parents)
        self.assertEqual(again.keywords(), self.taxonomy.keywords())
        self.assertEqual(self.mh.messages, [])


class Test_Invalid_Taxonomy(unittest.TestCase):
    def setUp(self):
        self.mh = List_Handler()

    def expectInvalid(self, data):
        with self.assertRaises(LAMP_Error) as ctx:
            Semantic_Taxonomy.from_json(self.mh, data, Location("tax.json"))
        self.assertEqual(ctx.exception.code, "InvalidTaxonomy")
        return ctx.exception.message

    def testNotAnArray(self):
        self.expectInvalid({"any place": "ROOT"})

    def testBadRow(self):
        self.assertEqual(self.expectInvalid([["any place", "ROOT"],
                                             ["bar"]]),
                         "row 2 is not a [keyword, parent] pair")

    def testTwoRoots(self):
        message = self.expectInvalid([["any place", "ROOT"],
                                      ["somewhere", "ROOT"]])
        self.assertIn("exactly one root", message)

    def testNoRoot(self):
        self.expectInvalid([["bar", "pub"], ["pub", "bar"]])

    def testMissingParent(self):
        self.assertEqual(self.expectInvalid([["any place", "ROOT"],
                                             ["bar", "drinking"]]),
                         "parent drinking of bar is not declared")

    def testCycle(self):
        message = self.expectInvalid([["any place", "ROOT"],
                                      ["bar", "pub"],
                                      ["pub", "bar"]])
        self.assertTrue(message.startswith("cycle in taxonomy"))

    def testTooDeep(self):
        self.assertEqual(self.expectInvalid([["any place", "ROOT"],
                                             ["a", "any place"],
                                             ["b", "a"],
                                             ["c", "b"],
                                             ["d", "c"]]),
                         "d is 5 levels deep, at most 4 are allowed")

    def testDuplicate(self):
        self.expectInvalid([["any place", "ROOT"],
                            ["bar", "any place"],
                            ["Bar", "any place"]])

    def testObjectRows(self):
        taxonomy = Semantic_Taxonomy.from_json(
            self.mh,
            [{"keyword": "any place", "parent": "ROOT"},
             {"keyword": "Wine Bar", "parent": "any place"}],
            Location("tax.json"))
        self.assertEqual(taxonomy.ancestors("wine bar"),
                         ["wine bar", "any place"])
