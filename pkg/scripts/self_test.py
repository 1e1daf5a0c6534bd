import asyncio
import json
import os
import sys
import tempfile
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))


def _setup_env(base_dir: Path) -> Path:
    config_root = base_dir / "config"
    config_root.mkdir(parents=True, exist_ok=True)
    os.environ["MLOOM_CONFIG_ROOT"] = str(config_root)
    os.environ.setdefault("MLOOM_WORKERS", "1")
    return config_root


async def main():
    with tempfile.TemporaryDirectory() as tmpdir:
        config_root = _setup_env(Path(tmpdir))

        from app.core.convex import ConvexConfig
        from app.core.db import SessionLocal, init_db
        from app.services.compat_service import WitnessKind, exists_witness, validate_witness
        from app.services.dcg_service import analyze, build_dcg
        from app.services.export_service import export_graph, load_graph
        from app.services.matching_service import Parity, enumerate_matchings, perimeter_matching
        from app.services.run_service import RunRecord, fetch_recent_runs, record_run
        from app.services.verify_service import verify_suite

        counts = [len(enumerate_matchings(ConvexConfig(size))) for size in range(2, 13, 2)]
        assert counts == [1, 2, 5, 14, 42, 132], f"Unexpected matching counts {counts}"

        config = ConvexConfig(10)
        even, odd = (perimeter_matching(config, p) for p in (Parity.EVEN, Parity.ODD))
        assert exists_witness(even, odd, WitnessKind.TREE) is None, "Perimeter matchings share no perimeter edge"
        witness = exists_witness(even, even, WitnessKind.PATH)
        assert witness is not None and not validate_witness(config, witness, (even,)), "Expected a valid spanning path"

        dcg = build_dcg(config, WitnessKind.TREE)
        report = analyze(dcg)
        assert report.vertex_count == 42 and report.connected, report.summary()

        exported = export_graph(dcg, config_root / "exports" / "tree-10.json")
        assert load_graph(exported).edges() == dcg.edges(), "JSON export did not round-trip"

        suite = verify_suite(config, "shared-perimeter")
        assert suite.passed, json.dumps(suite.as_dict(), indent=2)

        await init_db()
        async with SessionLocal() as session:
            await record_run(session, RunRecord("dcg", 10, "Tree", True, report.as_dict()))
            runs = await fetch_recent_runs(session)
            assert runs and runs[0].points == 10, "Run history not recorded"

        print("Self-test passed ✓")


if __name__ == "__main__":
    asyncio.run(main())
