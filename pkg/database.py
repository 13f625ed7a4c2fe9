from flask_sqlalchemy import SQLAlchemy
from datetime import datetime

db = SQLAlchemy()


class ReportRun(db.Model):
    """One archived verify or search run"""
    __tablename__ = 'report_runs'

    id = db.Column(db.Integer, primary_key=True)
    kind = db.Column(db.String(20), nullable=False, index=True)  # verify, search, sweep
    suite = db.Column(db.String(255))  # exhaustive(3), random(6,1000,42), file(...)
    n = db.Column(db.Integer)
    seed = db.Column(db.Integer)
    p_grid = db.Column(db.Text)  # Comma-separated biases
    passed = db.Column(db.Boolean)  # verify: no blocking failures
    violations = db.Column(db.Integer, default=0)  # Conjecture violations recorded
    report_json = db.Column(db.Text, nullable=False)  # Full serialized report
    created_at = db.Column(db.DateTime, default=datetime.utcnow)

    # Relationships
    checks = db.relationship('CheckSummary', backref='run', lazy=True, cascade='all, delete-orphan')
    records = db.relationship('ExtremalRow', backref='run', lazy=True, cascade='all, delete-orphan')

    def to_dict(self, include_report=False):
        data = {
            'id': self.id,
            'kind': self.kind,
            'suite': self.suite,
            'n': self.n,
            'seed': self.seed,
            'p_grid': [float(p) for p in self.p_grid.split(',')] if self.p_grid else [],
            'passed': self.passed,
            'violations': self.violations,
            'created_at': self.created_at.isoformat() if self.created_at else None,
        }
        if include_report:
            data['checks'] = [check.to_dict() for check in self.checks]
            data['records'] = [record.to_dict() for record in self.records]
            data['report_json'] = self.report_json
        return data

    def __repr__(self):
        return f'<ReportRun {self.id} ({self.kind})>'


class CheckSummary(db.Model):
    """Aggregate of one named check within a verify run"""
    __tablename__ = 'check_summaries'

    id = db.Column(db.Integer, primary_key=True)
    run_id = db.Column(db.Integer, db.ForeignKey('report_runs.id'), nullable=False)

    name = db.Column(db.String(64), nullable=False)
    count = db.Column(db.Integer, default=0)
    failures = db.Column(db.Integer, default=0)
    min_slack = db.Column(db.Float)
    argmin_tt = db.Column(db.Text)
    argmin_p = db.Column(db.Float)

    __table_args__ = (
        db.Index('idx_check_run', 'run_id', 'name'),
    )

    def to_dict(self):
        return {
            'name': self.name,
            'count': self.count,
            'failures': self.failures,
            'min_slack': self.min_slack,
            'argmin_tt': self.argmin_tt,
            'argmin_p': self.argmin_p,
        }

    def __repr__(self):
        return f'<CheckSummary {self.name} ({self.failures}/{self.count} failed)>'


class ExtremalRow(db.Model):
    """Leaderboard entry of a search run"""
    __tablename__ = 'extremal_rows'

    id = db.Column(db.Integer, primary_key=True)
    run_id = db.Column(db.Integer, db.ForeignKey('report_runs.id'), nullable=False)

    tt = db.Column(db.Text, nullable=False)  # Truth-table string
    n = db.Column(db.Integer, nullable=False)
    p = db.Column(db.Float, nullable=False)
    entropy = db.Column(db.Float)
    sum_sq_influences = db.Column(db.Float)
    ratio = db.Column(db.Float, index=True)
    conjecture_slack = db.Column(db.Float)
    rank = db.Column(db.Integer)  # Position on the leaderboard (0 = best)

    def to_dict(self):
        return {
            'tt': self.tt,
            'n': self.n,
            'p': self.p,
            'entropy': self.entropy,
            'sum_sq_influences': self.sum_sq_influences,
            'ratio': self.ratio,
            'conjecture_slack': self.conjecture_slack,
            'rank': self.rank,
        }

    def __repr__(self):
        return f'<ExtremalRow {self.tt} p={self.p} ratio={self.ratio}>'


class AnalysisJob(db.Model):
    """Background verify/search request submitted over HTTP"""
    __tablename__ = 'analysis_jobs'

    id = db.Column(db.Integer, primary_key=True)
    kind = db.Column(db.String(20), nullable=False)  # verify or search
    params_json = db.Column(db.Text, nullable=False)
    status = db.Column(db.String(20), default='queued')  # queued, running, done, failed
    message = db.Column(db.Text)  # Error message when failed
    run_id = db.Column(db.Integer, db.ForeignKey('report_runs.id'), nullable=True)
    created_at = db.Column(db.DateTime, default=datetime.utcnow)
    started_at = db.Column(db.DateTime)
    finished_at = db.Column(db.DateTime)

    run = db.relationship('ReportRun')

    def to_dict(self):
        return {
            'id': self.id,
            'kind': self.kind,
            'status': self.status,
            'message': self.message,
            'run_id': self.run_id,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'started_at': self.started_at.isoformat() if self.started_at else None,
            'finished_at': self.finished_at.isoformat() if self.finished_at else None,
        }

    def __repr__(self):
        return f'<AnalysisJob {self.id} {self.kind} ({self.status})>'
