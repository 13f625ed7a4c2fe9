from flask import Blueprint, Flask, current_app, jsonify, request
import os
import logging
import atexit
import json

from config import Config
from database import db, AnalysisJob
from archive import RunArchive
from core import Bias, parse_truth_table
from errors import BBLabError
from families import parse_family
from job_scheduler import JOB_KINDS, JobScheduler
from restriction import Chain
from verify import analyze_function, moments_report, stability_report
from sqlalchemy import event
from sqlalchemy.engine import Engine

# Setup logger
logger = logging.getLogger(__name__)

api = Blueprint('api', __name__)
run_archive = RunArchive()


# Set SQLite pragmas for better compatibility
@event.listens_for(Engine, "connect")
def set_sqlite_pragma(dbapi_conn, connection_record):
    if type(dbapi_conn).__module__.startswith('sqlite3'):
        cursor = dbapi_conn.cursor()
        cursor.execute("PRAGMA journal_mode=DELETE")
        cursor.execute("PRAGMA synchronous=NORMAL")
        cursor.execute("PRAGMA temp_store=MEMORY")
        cursor.close()


def _error(message, status=400):
    return jsonify({'success': False, 'message': message}), status


def _function_arg():
    """Function from ?tt= or ?family="""
    family = request.args.get('family')
    if family:
        return parse_family(family)
    tt = request.args.get('tt')
    if not tt:
        raise ValueError('Parameter tt (or family) is required')
    return parse_truth_table(tt)


def _bias_arg():
    if 'p' not in request.args:
        raise ValueError('Parameter p is required')
    return Bias(request.args['p'])


def _chain_arg(n):
    chain = request.args.get('chain')
    return Chain.parse(chain, n) if chain else None


def _float_arg(name, default=None):
    value = request.args.get(name)
    if value is None:
        if default is None:
            raise ValueError(f'Parameter {name} is required')
        return default
    try:
        return float(value)
    except ValueError:
        raise ValueError(f'Parameter {name} must be a number, got {value!r}')


def _int_arg(name, default=None):
    value = request.args.get(name)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f'Parameter {name} must be an integer, got {value!r}')


@api.route('/api/analyze')
def analyze():
    """Per-function report"""
    try:
        f = _function_arg()
        bias = _bias_arg()
        report = analyze_function(f, bias, _chain_arg(f.n))
    except (BBLabError, ValueError) as e:
        return _error(str(e))
    return jsonify({'success': True, 'report': report})


@api.route('/api/stability')
def stability():
    """Spectral noise stability, with ?mc=<samples> for the Monte Carlo estimate"""
    try:
        f = _function_arg()
        bias = _bias_arg()
        report = stability_report(f, bias, _float_arg('eps'), _int_arg('mc'),
                                  _int_arg('seed', Config.DEFAULT_SEED))
    except (BBLabError, ValueError) as e:
        return _error(str(e))
    return jsonify({'success': True, 'report': report})


@api.route('/api/moments')
def moments():
    """Moments along a chain, increments and the proof ledger"""
    try:
        f = _function_arg()
        bias = _bias_arg()
        report = moments_report(f, bias, _float_arg('eps'), _chain_arg(f.n),
                                ledger=request.args.get('ledger', '1') not in ('0', 'false', 'no'))
    except (BBLabError, ValueError) as e:
        return _error(str(e))
    return jsonify({'success': True, 'report': report})


@api.route('/api/jobs', methods=['POST'])
def submit_job():
    """Queue a verify or search run"""
    data = request.get_json(silent=True) or {}
    kind = data.get('kind')
    if kind not in JOB_KINDS:
        return _error(f'kind must be one of {", ".join(JOB_KINDS)}')

    try:
        job = current_app.extensions['job_scheduler'].submit(kind, data.get('params') or {})
    except (BBLabError, ValueError, KeyError, TypeError) as e:
        return _error(f'Invalid job parameters: {e}')

    db.session.expire_all()
    job = db.session.get(AnalysisJob, job.id)
    return jsonify({'success': True, 'job': job.to_dict()}), 202


@api.route('/api/jobs/<int:job_id>')
def job_status(job_id):
    job = db.session.get(AnalysisJob, job_id)
    if not job:
        return _error('Job not found', 404)
    data = job.to_dict()
    data['params'] = json.loads(job.params_json)
    return jsonify({'success': True, 'job': data})


@api.route('/api/runs')
def list_runs():
    """Archived runs, newest first"""
    try:
        limit = _int_arg('limit', 50)
    except ValueError as e:
        return _error(str(e))
    runs = run_archive.list_runs(request.args.get('kind'), limit)
    return jsonify({'success': True, 'runs': [run.to_dict() for run in runs]})


@api.route('/api/runs/<int:run_id>')
def get_run(run_id):
    run = run_archive.get_run(run_id)
    if not run:
        return _error('Run not found', 404)
    data = run.to_dict(include_report=True)
    data['report'] = json.loads(data.pop('report_json'))
    return jsonify({'success': True, 'run': data})


def create_app(overrides=None, start_jobs=True):
    """
    Build the JSON service

    Args:
        overrides: config values applied after Config (e.g. SQLALCHEMY_DATABASE_URI)
        start_jobs: run submitted jobs in the background; False runs them inline
    """
    app = Flask(__name__)
    app.config.from_object(Config)
    if overrides:
        app.config.update(overrides)
    if not app.config['SQLALCHEMY_DATABASE_URI'].startswith('sqlite'):
        app.config['SQLALCHEMY_ENGINE_OPTIONS'] = {}

    db.init_app(app)
    app.register_blueprint(api)

    with app.app_context():
        # Set umask to ensure database is created with rw-rw-r-- (664) permissions
        old_umask = os.umask(0o002)
        try:
            db.create_all()
        finally:
            os.umask(old_umask)

    scheduler = JobScheduler(app, background=start_jobs)
    app.extensions['job_scheduler'] = scheduler
    return app


if __name__ == '__main__':
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
        format=Config.LOG_FORMAT,
        datefmt=Config.LOG_DATEFMT
    )

    app = create_app()
    atexit.register(app.extensions['job_scheduler'].shutdown)

    # Run Flask app
    logger.info(f"Starting Biased FEI Lab service on {Config.HOST}:{Config.PORT}")
    app.run(host=Config.HOST, port=Config.PORT, debug=Config.DEBUG)
