# db.py
import logging
from contextlib import contextmanager
from typing import Dict, List, Optional

from sqlmodel import SQLModel, Session, create_engine, select

from .config import DB_URL
from .models import RunRecord

logger = logging.getLogger(__name__)

_engines = {}


def get_engine(url: Optional[str] = None):
    """One engine per database URL; None when the ledger is disabled"""
    url = DB_URL if url is None else url
    if not url:
        return None
    if url not in _engines:
        kwargs = {"echo": False}
        if url.startswith("sqlite"):
            kwargs["connect_args"] = {"check_same_thread": False, "timeout": 20}
        _engines[url] = create_engine(url, **kwargs)
    return _engines[url]


def init_db(url: Optional[str] = None) -> None:
    engine = get_engine(url)
    if engine is not None:
        SQLModel.metadata.create_all(engine, checkfirst=True)


@contextmanager
def get_session(url: Optional[str] = None):
    with Session(get_engine(url)) as ses:
        yield ses


def record_run(command: str, config_hash: str, exit_code: int, summary: Dict,
               url: Optional[str] = None) -> Optional[RunRecord]:
    """Append one ledger row; ledger problems are logged, never raised"""
    if get_engine(url) is None:
        return None
    try:
        init_db(url)
        with get_session(url) as ses:
            row = RunRecord(command=command, config_hash=config_hash, exit_code=exit_code, summary=summary)
            ses.add(row)
            ses.commit()
            ses.refresh(row)
            return row
    except Exception as e:
        logger.warning("could not record run in the ledger: %s", e)
        return None


def recent_runs(limit: int = 20, url: Optional[str] = None) -> List[RunRecord]:
    if get_engine(url) is None:
        return []
    init_db(url)
    with get_session(url) as ses:
        stmt = select(RunRecord).order_by(RunRecord.id.desc()).limit(limit)
        return list(ses.exec(stmt).all())
