import asyncio
import json
import tempfile
from pathlib import Path
from unittest import TestCase, mock

from fastapi.testclient import TestClient
from sqlalchemy.ext.asyncio import async_sessionmaker, create_async_engine
from sqlalchemy.pool import NullPool

from app.core import models  # noqa: F401
from app.core.db import Base, get_session
from app.core.errors import ChordError
from app.main import app
from app.services import run_service
from app.services.status_service import get_status
from app.worker import queue as worker_queue
from app.worker.jobs import job_result, job_status, run_job
from app.worker.queue import Job, enqueue_job, job_queue

EVEN10 = "0-1,2-3,4-5,6-7,8-9"
ODD10 = "0-9,1-2,3-4,5-6,7-8"


class ApiTests(TestCase):
    def setUp(self):
        # no startup hooks: the worker thread stays idle and sessions go to a throwaway database
        self.tmpdir = tempfile.TemporaryDirectory()
        self.engine = create_async_engine(f"sqlite+aiosqlite:///{self.tmpdir.name}/test.db", poolclass=NullPool)
        asyncio.run(self._create_tables())
        sessions = async_sessionmaker(self.engine, expire_on_commit=False)

        async def override_session():
            async with sessions() as session:
                yield session

        app.dependency_overrides[get_session] = override_session
        self.client = TestClient(app)

    def tearDown(self):
        app.dependency_overrides.clear()
        asyncio.run(self.engine.dispose())
        self.tmpdir.cleanup()

    async def _create_tables(self):
        async with self.engine.begin() as conn:
            await conn.run_sync(Base.metadata.create_all)

    def test_health(self):
        body = self.client.get("/api/health").json()
        self.assertEqual(body["status"], "ok")
        self.assertIn("tree", body["limits"])

    def test_matchings(self):
        body = self.client.get("/api/matchings/", params={"points": 8, "classify": True}).json()
        self.assertEqual(body["count"], 14)
        self.assertEqual(body["matchings"][0]["matching"], "0-1,2-3,4-5,6-7")
        self.assertIsNotNone(body["matchings"][0]["klass"])
        self.assertEqual(self.client.get("/api/matchings/", params={"points": 7}).status_code, 400)

    def test_compat(self):
        body = self.client.post("/api/compat", json={"points": 10, "m1": EVEN10, "m2": ODD10}).json()
        self.assertFalse(body["compatible"])
        self.assertEqual(body["obstruction"]["kind"], "SharedPerimeterDeficit")
        body = self.client.post("/api/compat", json={"points": 10, "m1": EVEN10, "m2": EVEN10, "witness": True}).json()
        self.assertTrue(body["compatible"])
        self.assertEqual(len(body["witness"]), 9)

    def test_compat_rejects_bad_text(self):
        resp = self.client.post("/api/compat", json={"points": 4, "m1": "0-2,1-3", "m2": "0-1,2-3"})
        self.assertEqual(resp.status_code, 400)

    def test_route(self):
        body = self.client.post("/api/route", json={"points": 10, "m1": EVEN10, "m2": EVEN10}).json()
        self.assertEqual(body["length"], 0)
        resp = self.client.post("/api/route", json={"points": 8, "m1": "0-1,2-3,4-5,6-7", "m2": "0-7,1-2,3-4,5-6"})
        self.assertEqual(resp.status_code, 422)

    def test_route_maps_library_errors_to_400(self):
        with mock.patch("app.api.routes_compat.tree_path_between", side_effect=ChordError("degenerate chord 9-9")):
            resp = self.client.post("/api/route", json={"points": 10, "m1": EVEN10, "m2": ODD10})
        self.assertEqual(resp.status_code, 400)
        self.assertIn("degenerate chord", resp.json()["detail"])

    def test_size_guard_and_unknown_suite(self):
        resp = self.client.post("/api/dcg", json={"points": 14, "family": "path"})
        self.assertEqual(resp.status_code, 413)
        resp = self.client.post("/api/verify", json={"points": 10, "suite": "bogus"})
        self.assertEqual(resp.status_code, 400)

    def test_unknown_job(self):
        self.assertEqual(self.client.get("/api/jobs/nope").status_code, 404)

    def test_compat_logs_decision(self):
        self.client.post("/api/compat", json={"points": 10, "m1": EVEN10, "m2": ODD10})
        entries = self.client.get("/api/activity/", params={"kind": "decision"}).json()
        self.assertEqual(len(entries), 1)
        self.assertEqual((entries[0]["kind"], entries[0]["points"]), ("decision", 10))
        payload = json.loads(entries[0]["payload_json"])
        self.assertFalse(payload["compatible"])
        self.assertEqual(payload["obstruction"], "SharedPerimeterDeficit")
        self.assertEqual(payload["m1"], EVEN10)
        self.assertEqual(self.client.get("/api/activity/", params={"kind": "job"}).json(), [])

    def test_activity_filters_by_points_and_level(self):
        self.client.post("/api/compat", json={"points": 10, "m1": EVEN10, "m2": EVEN10})
        self.client.post("/api/compat", json={"points": 8, "m1": "0-1,2-3,4-5,6-7", "m2": "0-1,2-3,4-5,6-7"})
        entries = self.client.get("/api/activity/", params={"points": 8}).json()
        self.assertEqual([e["points"] for e in entries], [8])
        self.assertEqual(len(self.client.get("/api/activity/", params={"level": "info"}).json()), 2)
        self.assertEqual(self.client.get("/api/activity/", params={"level": "ERROR"}).json(), [])
        self.assertEqual(self.client.get("/api/activity/", params={"kind": "bogus"}).status_code, 422)

    def test_queued_jobs_are_logged(self):
        with mock.patch("app.api.routes_dcg.enqueue", return_value="job-queued") as enqueue:
            body = self.client.post("/api/dcg", json={"points": 8, "family": "tree"}).json()
        self.assertEqual(body["job_id"], "job-queued")
        enqueue.assert_called_once()
        entries = self.client.get("/api/activity/", params={"kind": "job"}).json()
        self.assertEqual(len(entries), 1)
        self.assertTrue(entries[0]["message"].startswith("queued dcg_"))
        self.assertEqual(json.loads(entries[0]["payload_json"])["job_id"], "job-queued")

    def test_status(self):
        body = self.client.get("/api/status/").json()
        self.assertIn("queue_depth", body)
        self.assertIn("state", body["status"])


class JobTests(TestCase):
    def test_run_job_records_result_and_failure(self):
        ok = Job(id="job-ok", name="ok", fn=lambda: {"answer": 42})
        run_job(ok)
        self.assertEqual(job_status("job-ok"), "done")
        self.assertEqual(job_result("job-ok"), {"answer": 42})

        def boom():
            raise RuntimeError("exploded")

        with self.assertLogs("matchloom.worker", level="ERROR"):
            run_job(Job(id="job-bad", name="bad", fn=boom))
        self.assertEqual(job_status("job-bad"), "failed")
        self.assertEqual(job_result("job-bad"), {"error": "exploded"})

    def test_finished_jobs_beyond_history_are_forgotten(self):
        with mock.patch.object(worker_queue.settings, "job_history", 2):
            worker_queue.set_status("hist-live", "running")
            try:
                for i in range(4):
                    run_job(Job(id=f"hist-{i}", name="noop", fn=lambda i=i: {"i": i}))
                self.assertIsNone(job_status("hist-0"))
                self.assertIsNone(job_result("hist-1"))
                self.assertEqual(job_status("hist-2"), "done")
                self.assertEqual(job_result("hist-3"), {"i": 3})
                self.assertEqual(job_status("hist-live"), "running")
                finished = [jid for jid, st in worker_queue.job_status.items() if st in worker_queue.FINISHED]
                self.assertEqual(finished, ["hist-2", "hist-3"])
            finally:
                worker_queue.job_status.pop("hist-live", None)

    def test_enqueue_marks_queued(self):
        job_id = enqueue_job("noop", lambda: None)
        self.assertEqual(job_status(job_id), "queued")
        job = job_queue.get_nowait()
        self.assertEqual(job.id, job_id)
        job_queue.task_done()

    def test_dcg_job_exports_and_records(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            with mock.patch.object(run_service, "exports_dir", return_value=Path(tmpdir)), \
                    mock.patch.object(run_service, "_persist", new=mock.AsyncMock()) as persist:
                payload = run_service.dcg_job(8, "tree", quotient=True)
            self.assertTrue((Path(tmpdir) / "tree-8.json").exists())
        self.assertEqual(payload["report"]["vertices"], 14)
        self.assertIn("orbits", payload["quotient"])
        record = persist.await_args.args[0]
        self.assertEqual((record.kind, record.points, record.target), ("dcg", 8, "Tree"))
        self.assertEqual(get_status()["state"], "standby")

    def test_verify_job_records_pass_flag(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            with mock.patch.object(run_service, "exports_dir", return_value=Path(tmpdir)), \
                    mock.patch.object(run_service, "_persist", new=mock.AsyncMock()) as persist:
                payload = run_service.verify_job(8, "shared-perimeter")
            self.assertTrue((Path(tmpdir) / "verify-shared-perimeter-8.json").exists())
        self.assertEqual(payload["suite"], "shared-perimeter")
        self.assertTrue(persist.await_args.args[0].passed)
