import io
import json
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import TestCase, mock

from app import cli
from app.services.dcg_service import build_dcg

EVEN10 = "0-1,2-3,4-5,6-7,8-9"
ODD10 = "0-9,1-2,3-4,5-6,7-8"
EVEN12 = "0-1,2-3,4-5,6-7,8-9,10-11"
ODD12 = "0-11,1-2,3-4,5-6,7-8,9-10"


class CliTests(TestCase):
    def setUp(self):
        patcher = mock.patch.object(cli, "setup_logging")
        patcher.start()
        self.addCleanup(patcher.stop)

    def _run(self, *argv: str) -> tuple[int, str, str]:
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = cli.main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def test_enumerate(self):
        code, out, _ = self._run("enumerate", "4")
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines(), ["0-1,2-3", "0-3,1-2"])
        code, out, _ = self._run("enumerate", "10", "--classify")
        lines = out.splitlines()
        self.assertEqual(len(lines), 42)
        self.assertEqual(sum(1 for line in lines if "\tPerimeter" in line), 2)

    def test_odd_point_count_is_a_usage_error(self):
        with redirect_stderr(io.StringIO()), self.assertRaises(SystemExit) as ctx:
            cli.main(["enumerate", "7"])
        self.assertEqual(ctx.exception.code, 2)

    def test_compat_refusal_names_obstruction(self):
        code, out, _ = self._run("compat", "--m1", EVEN10, "--m2", ODD10)
        self.assertEqual(code, 1)
        self.assertIn("compatible: no", out)
        self.assertIn("SharedPerimeterDeficit", out)

    def test_compat_three_semiears(self):
        code, out, _ = self._run("compat", "--family", "path", "--m1", "0-3,1-2,4-7,5-6,8-11,9-10", "--m2", EVEN12)
        self.assertEqual(code, 1)
        self.assertIn("ThreeSemiears", out)

    def test_compat_single_matching_with_witness_and_oracle(self):
        code, out, _ = self._run("compat", "--m1", EVEN10, "--m2", EVEN10, "--witness", "--oracle")
        self.assertEqual(code, 0)
        self.assertIn("compatible: yes", out)
        self.assertIn("witness (", out)
        self.assertIn("(agrees)", out)

    def test_bad_matching_text_is_an_input_error(self):
        code, _, err = self._run("compat", "--m1", "0-2,1-3", "--m2", "0-1,2-3")
        self.assertEqual(code, 2)
        self.assertIn("cross", err)

    def test_route_between_perimeters(self):
        code, out, _ = self._run("route", "--m1", EVEN12, "--m2", ODD12)
        self.assertEqual(code, 0)
        self.assertLessEqual(int(out.splitlines()[-1].split(":")[1]), 3)
        code, out, _ = self._run("route", "--m1", EVEN12, "--m2", EVEN12)
        self.assertEqual(out.splitlines()[-1], "length: 0")

    def test_route_too_small(self):
        code, _, err = self._run("route", "--m1", "0-1,2-3,4-5,6-7", "--m2", "0-7,1-2,3-4,5-6")
        self.assertEqual(code, 2)
        self.assertIn("10 points", err)

    def test_dcg_stats_and_export(self):
        code, out, _ = self._run("dcg", "--points", "10", "--stats")
        self.assertEqual(code, 0)
        self.assertIn("vertices=42", out)
        self.assertIn("connected=true", out)
        with tempfile.TemporaryDirectory() as tmpdir:
            target = Path(tmpdir) / "path-10.dot"
            code, out, _ = self._run("dcg", "--points", "10", "--family", "path", "--out", str(target), "--format", "dot", "--stats")
            self.assertEqual(code, 0)
            self.assertIn("connected=false", out)
            self.assertTrue(target.read_text().startswith("graph "))

    def test_dcg_quotient(self):
        code, out, _ = self._run("dcg", "--points", "10", "--quotient")
        self.assertEqual(code, 0)
        self.assertIn("automorphism=true", out)

    def test_size_guard(self):
        code, _, err = self._run("dcg", "--points", "14", "--family", "path")
        self.assertEqual(code, 2)
        self.assertIn("--unsafe-size", err)

    def test_workers_flag_wins(self):
        with mock.patch.object(cli, "build_dcg", wraps=build_dcg) as spy:
            code, _, _ = self._run("--workers", "2", "dcg", "--points", "6")
        self.assertEqual(code, 0)
        self.assertEqual(spy.call_args.args[2], 2)

    def test_verify_writes_report(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            target = Path(tmpdir) / "report.json"
            code, out, _ = self._run("verify", "--suite", "shared-perimeter", "--points", "8", "--report", str(target))
            self.assertEqual(code, 0)
            self.assertIn("pass", out)
            self.assertEqual(json.loads(target.read_text())["suite"], "shared-perimeter")

    def test_verify_unknown_suite(self):
        code, _, err = self._run("verify", "--suite", "bogus", "--points", "8")
        self.assertEqual(code, 2)
        self.assertIn("unknown suite", err)
