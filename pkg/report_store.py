import sqlite3
import json
import logging
from datetime import datetime

logger = logging.getLogger("ReportStore")


class ReportStore:
    """SQLite archive of verification runs and their reports."""

    def __init__(self, db_path):
        self.db_path = db_path
        self._init_db()

    def _get_conn(self):
        # 30s timeout to wait for locks held by a concurrent run
        return sqlite3.connect(self.db_path, timeout=30.0)

    def _init_db(self):
        try:
            with self._get_conn() as conn:
                c = conn.cursor()
                c.execute("PRAGMA journal_mode=WAL;")

                # One row per archived CLI invocation
                c.execute("""CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    invocation TEXT,
                    suite TEXT,
                    created TIMESTAMP,
                    exit_status INTEGER,
                    workers INTEGER
                )""")

                c.execute("""CREATE TABLE IF NOT EXISTS reports (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id INTEGER REFERENCES runs(id),
                    check_id TEXT,
                    config_hash TEXT,
                    verdict TEXT,
                    rel_error REAL,
                    payload TEXT
                )""")
                c.execute("CREATE INDEX IF NOT EXISTS idx_reports_run ON reports (run_id)")
                conn.commit()
        except Exception as e:
            logger.error(f"Failed to initialize report store: {e}")
            raise

    # --- Runs ---

    def record_run(self, invocation, suite, reports, exit_status, workers):
        """Stores a run and all its reports in one transaction. Returns the run id."""
        with self._get_conn() as conn:
            c = conn.cursor()
            c.execute("""
                INSERT INTO runs (invocation, suite, created, exit_status, workers)
                VALUES (?, ?, ?, ?, ?)
            """, (invocation, suite, datetime.now().isoformat(sep=' '), int(exit_status), int(workers)))
            run_id = c.lastrowid
            c.executemany("""
                INSERT INTO reports (run_id, check_id, config_hash, verdict, rel_error, payload)
                VALUES (?, ?, ?, ?, ?, ?)
            """, [(run_id, r.check_id, r.config_hash, r.verdict, r.rel_error, r.to_json()) for r in reports])
            conn.commit()
        logger.info(f"Archived run {run_id} ({suite}): {len(reports)} reports")
        return run_id

    def get_runs(self, limit=20):
        """Most recent runs first, as dicts."""
        try:
            with self._get_conn() as conn:
                c = conn.cursor()
                c.execute("""
                    SELECT id, invocation, suite, created, exit_status, workers
                    FROM runs ORDER BY id DESC LIMIT ?
                """, (int(limit),))
                keys = ("id", "invocation", "suite", "created", "exit_status", "workers")
                return [dict(zip(keys, row)) for row in c.fetchall()]
        except Exception as e:
            logger.error(f"Failed to read runs: {e}")
            return []

    def get_reports(self, run_id, verdict=None):
        """Parsed report payloads of one run in archive order, optionally filtered by verdict."""
        try:
            with self._get_conn() as conn:
                c = conn.cursor()
                if verdict:
                    c.execute("SELECT payload FROM reports WHERE run_id = ? AND verdict = ? ORDER BY id",
                              (int(run_id), verdict))
                else:
                    c.execute("SELECT payload FROM reports WHERE run_id = ? ORDER BY id", (int(run_id),))
                return [json.loads(row[0]) for row in c.fetchall()]
        except Exception as e:
            logger.error(f"Failed to read reports of run {run_id}: {e}")
            return []

    def verdict_counts(self, run_id):
        """{verdict: count} for one run."""
        try:
            with self._get_conn() as conn:
                c = conn.cursor()
                c.execute("SELECT verdict, COUNT(*) FROM reports WHERE run_id = ? GROUP BY verdict", (int(run_id),))
                return {verdict: count for verdict, count in c.fetchall()}
        except Exception as e:
            logger.error(f"Failed to count verdicts of run {run_id}: {e}")
            return {}

    # --- Maintenance ---

    def nuke(self):
        """Drops every table and re-initializes the archive."""
        try:
            with self._get_conn() as conn:
                c = conn.cursor()
                c.execute("SELECT name FROM sqlite_master WHERE type='table'")
                for (table_name,) in c.fetchall():
                    if table_name != "sqlite_sequence":
                        c.execute(f"DROP TABLE IF EXISTS {table_name}")
                conn.commit()
            logger.warning("⚠️ Report archive wiped. Re-initializing...")
            self._init_db()
            return True
        except Exception as e:
            logger.error(f"Failed to wipe report archive: {e}")
            return False
