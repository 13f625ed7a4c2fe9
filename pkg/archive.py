"""
Run archive: verify and search reports stored through Flask-SQLAlchemy

Calls need an application context. Failures are logged and reported as None;
archiving never fails the run that produced the report.
"""
import logging
from typing import List, Optional

from database import db, CheckSummary, ExtremalRow, ReportRun
from reports import dumps

logger = logging.getLogger(__name__)


def _p_grid_text(p_grid) -> str:
    return ','.join(repr(float(p)) for p in p_grid)


class RunArchive:
    """Persists reports as ReportRun rows with their check summaries or leaderboards"""

    def save_verification(self, report) -> Optional[int]:
        data = report.to_dict() if hasattr(report, 'to_dict') else report
        try:
            params = data['params']
            violations = next((c['failures'] for c in data['checks'] if c['name'] == 'conjecture'), 0)
            run = ReportRun(
                kind='verify',
                suite=data['suite'],
                n=params.get('n'),
                seed=params.get('seed'),
                p_grid=_p_grid_text(params.get('p_grid', [])),
                passed=data.get('passed'),
                violations=violations,
                report_json=dumps(data),
            )
            for check in data['checks']:
                run.checks.append(CheckSummary(
                    name=check['name'],
                    count=check['count'],
                    failures=check['failures'],
                    min_slack=check['min_slack'],
                    argmin_tt=check['argmin_tt'],
                    argmin_p=check['argmin_p'],
                ))
            db.session.add(run)
            db.session.commit()
            logger.info(f"Archived verification run {run.id} ({run.suite})")
            return run.id
        except Exception as e:
            db.session.rollback()
            logger.error(f"Error archiving verification report: {e}", exc_info=True)
            return None

    def save_search(self, report) -> Optional[int]:
        """Store a search report or a sweep report (one leaderboard per p)"""
        data = report.to_dict() if hasattr(report, 'to_dict') else report
        try:
            parts = data.get('reports', [data])
            run = ReportRun(
                kind='sweep' if 'reports' in data else 'search',
                suite=data['mode'],
                n=data['n'],
                seed=data.get('seed'),
                p_grid=_p_grid_text(part['p'] for part in parts),
                passed=None,
                violations=sum(len(part['violations']) for part in parts),
                report_json=dumps(data),
            )
            for part in parts:
                for rank, record in enumerate(part['leaderboard']):
                    run.records.append(ExtremalRow(rank=rank, **record))
            db.session.add(run)
            db.session.commit()
            logger.info(f"Archived search run {run.id} (n={run.n}, {len(run.records)} records)")
            return run.id
        except Exception as e:
            db.session.rollback()
            logger.error(f"Error archiving search report: {e}", exc_info=True)
            return None

    def list_runs(self, kind: str = None, limit: int = 50) -> List[ReportRun]:
        try:
            query = ReportRun.query
            if kind:
                query = query.filter_by(kind=kind)
            return query.order_by(ReportRun.id.desc()).limit(limit).all()
        except Exception as e:
            logger.error(f"Error listing archived runs: {e}")
            return []

    def get_run(self, run_id: int) -> Optional[ReportRun]:
        try:
            return db.session.get(ReportRun, run_id)
        except Exception as e:
            logger.error(f"Error loading archived run {run_id}: {e}")
            return None
