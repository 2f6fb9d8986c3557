import datetime
import json
import sqlite3
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from modules.audit.settings import get_settings
from modules.errors import DuplicateId, InvalidUrl, MalformedSnapshot, PreconditionViolation
from modules.logger import get_logger
from modules.manifest.models import StoreListing

logger = get_logger(__name__)


@dataclass(frozen=True)
class SnapshotInfo:
    name: str
    source: str
    ingested_at: str
    listing_count: int


def parse_snapshot(text: str) -> List[StoreListing]:
    """Listings from a snapshot file: JSON Lines, or one JSON array of records.

    Raises:
        MalformedSnapshot: empty file, a line that is not a JSON object, or a bad record.
        DuplicateId: two records share a plugin_id.
    """
    if not text or not text.strip():
        raise MalformedSnapshot("snapshot is empty")

    stripped = text.lstrip()
    records: List[tuple] = []
    if stripped.startswith("["):
        try:
            doc = json.loads(text)
        except ValueError as e:
            raise MalformedSnapshot(f"not a JSON array ({e})") from e
        records = [(i, rec) for i, rec in enumerate(doc, start=1)]
    else:
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append((lineno, json.loads(line)))
            except ValueError as e:
                raise MalformedSnapshot(f"not JSON ({e.__class__.__name__})", lineno) from e

    listings: List[StoreListing] = []
    seen = set()
    for lineno, rec in records:
        if not isinstance(rec, dict):
            raise MalformedSnapshot("record is not an object", lineno)
        try:
            listing = StoreListing.from_record(rec)
        except (PreconditionViolation, InvalidUrl) as e:
            raise MalformedSnapshot(str(e), lineno) from e
        if listing.plugin_id in seen:
            raise DuplicateId(listing.plugin_id)
        seen.add(listing.plugin_id)
        listings.append(listing)
    return listings


class ListingStore:
    def __init__(self, db_path: Optional[Path] = None):
        self.db_path = Path(db_path) if db_path is not None else get_settings().db_path
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        logger.debug("listing store at %s", self.db_path)
        self.conn = sqlite3.connect(self.db_path, check_same_thread=False, timeout=5)

        self.conn.row_factory = sqlite3.Row
        self.conn.execute("PRAGMA journal_mode=WAL;")
        self.conn.execute("PRAGMA busy_timeout=5000;")
        self.conn.execute("PRAGMA foreign_keys = ON;")

        self._init_schema()

    def _init_schema(self):
        with self.conn:
            # snapshots must exist before listings, which references it via FK.
            self.conn.execute("""
                    CREATE TABLE IF NOT EXISTS snapshots (
                        name TEXT PRIMARY KEY NOT NULL,
                        source TEXT NOT NULL,
                        ingested_at TEXT NOT NULL
                    );
            """)

            self.conn.execute("""
                    CREATE TABLE IF NOT EXISTS listings (
                        snapshot TEXT NOT NULL REFERENCES snapshots(name) ON DELETE CASCADE,
                        plugin_id TEXT NOT NULL,
                        record TEXT NOT NULL,
                        PRIMARY KEY (snapshot, plugin_id)
                    );
            """)

    def close(self) -> None:
        try:
            self.conn.close()
        except Exception:
            pass

    def __enter__(self) -> "ListingStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def ingest(self, path: str | Path, name: Optional[str] = None) -> SnapshotInfo:
        """Parse a snapshot file and store it under `name` (default: the file stem).

        Re-ingesting under an existing name replaces that snapshot.
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise MalformedSnapshot(f"cannot read {path}: {e}") from e
        listings = parse_snapshot(text)
        return self.add_snapshot(name or path.stem, listings, source=str(path))

    def add_snapshot(self, name: str, listings: List[StoreListing], source: str = "") -> SnapshotInfo:
        if not name or not name.strip():
            raise PreconditionViolation("snapshot name must be non-empty")
        ingested_at = datetime.datetime.now(datetime.timezone.utc).isoformat()
        with self.conn:
            self.conn.execute("DELETE FROM snapshots WHERE name = ?", (name,))
            self.conn.execute(
                "INSERT INTO snapshots (name, source, ingested_at) VALUES (?, ?, ?)",
                (name, source, ingested_at),
            )
            self.conn.executemany(
                "INSERT INTO listings (snapshot, plugin_id, record) VALUES (?, ?, ?)",
                [(name, l.plugin_id, json.dumps(l.to_record(), ensure_ascii=False)) for l in listings],
            )
        logger.info("ingested %d listings as snapshot '%s'", len(listings), name)
        return SnapshotInfo(name, source, ingested_at, len(listings))

    def snapshots(self) -> List[SnapshotInfo]:
        """Oldest first."""
        cur = self.conn.cursor()
        cur.execute("""
                    SELECT s.name, s.source, s.ingested_at, COUNT(l.plugin_id) AS listing_count
                    FROM snapshots s LEFT JOIN listings l ON l.snapshot = s.name
                    GROUP BY s.name
                    ORDER BY s.ingested_at ASC, s.name ASC;
                    """)
        return [
            SnapshotInfo(row["name"], row["source"], row["ingested_at"], row["listing_count"])
            for row in cur.fetchall()
        ]

    def latest_snapshot(self) -> Optional[str]:
        snaps = self.snapshots()
        return snaps[-1].name if snaps else None

    def listings(self, snapshot: Optional[str] = None) -> List[StoreListing]:
        """Listings of `snapshot` (default: the latest one) ordered by plugin_id."""
        name = snapshot or self.latest_snapshot()
        if name is None:
            raise PreconditionViolation("no snapshot has been ingested yet")
        cur = self.conn.cursor()
        cur.execute("SELECT 1 FROM snapshots WHERE name = ? LIMIT 1;", (name,))
        if cur.fetchone() is None:
            raise PreconditionViolation(f"unknown snapshot '{name}'")
        cur.execute(
            """
            SELECT record FROM listings
            WHERE snapshot = ?
            ORDER BY plugin_id ASC;
            """,
            (name,),
        )
        return [StoreListing.from_record(json.loads(row["record"])) for row in cur.fetchall()]
