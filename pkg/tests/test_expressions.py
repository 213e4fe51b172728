"""
Tests for the restricted expression parser.
"""

import unittest

from halfspace_liouville.exceptions import SpecFormatError
from halfspace_liouville.expressions import FIELD_FUNCTIONS, parse_expression


class TestParseExpression(unittest.TestCase):

    def test_arithmetic(self):
        expr = parse_expression("l1 + 2*l2 - l3**2 / 4", 3)
        self.assertAlmostEqual(expr([1.0, 2.0, 2.0]), 4.0)

    def test_unary_minus_and_functions(self):
        expr = parse_expression("-min(l1, l2) + max(l1, 0)", 2)
        self.assertEqual(expr([3.0, -1.0]), 4.0)

    def test_field_prefix_and_functions(self):
        expr = parse_expression("log(1 + x1**2) + exp(-x2)", 2, prefix="x", functions=FIELD_FUNCTIONS)
        self.assertAlmostEqual(expr([0.0, 0.0]), 1.0)

    def test_log_not_allowed_for_eigenvalue_expressions(self):
        with self.assertRaises(SpecFormatError):
            parse_expression("log(l1)", 2)

    def test_rejects_unknown_variable(self):
        with self.assertRaises(SpecFormatError):
            parse_expression("l1 + l3", 2)

    def test_rejects_code_injection(self):
        """Anything outside the grammar is refused before evaluation."""
        for text in ("__import__('os').system('true')", "l1.real", "[l1, l2]", "l1 if l2 else 0",
                     "'abc'", "l1 < l2", "lambda: 0", "True + l1"):
            with self.subTest(text=text):
                with self.assertRaises(SpecFormatError):
                    parse_expression(text, 2)

    def test_rejects_keyword_arguments(self):
        with self.assertRaises(SpecFormatError):
            parse_expression("pow(l1, exp=2)", 2)

    def test_rejects_syntax_errors_and_blank_text(self):
        for text in ("l1 +", "", "   "):
            with self.subTest(text=text):
                with self.assertRaises(SpecFormatError):
                    parse_expression(text, 2)

    def test_evaluation_errors_are_spec_errors(self):
        expr = parse_expression("1 / (l1 - l2)", 2)
        with self.assertRaises(SpecFormatError):
            expr([1.0, 1.0])

    def test_wrong_arity(self):
        expr = parse_expression("l1 + l2", 2)
        with self.assertRaises(SpecFormatError):
            expr([1.0])


if __name__ == "__main__":
    unittest.main()
