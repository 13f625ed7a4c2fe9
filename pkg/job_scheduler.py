try:
    from apscheduler.schedulers.background import BackgroundScheduler
    from apscheduler.triggers.date import DateTrigger
    APSCHEDULER_AVAILABLE = True
except ImportError:
    APSCHEDULER_AVAILABLE = False

import json
import logging
import threading
from datetime import datetime

from archive import RunArchive
from config import Config
from core import Bias, bias_grid, parse_truth_table
from database import db, AnalysisJob
from discord_webhook import DiscordWebhook
from errors import BBLabError
from restriction import Chain
from search import EXHAUSTIVE, MODES, RANDOM, REFINE, exhaustive_search, p_sweep, random_search, refine_search
from verify import ExhaustiveSource, RandomSource, run_suite

logger = logging.getLogger(__name__)

JOB_KINDS = ('verify', 'search')


def _p_grid(params):
    grid = params.get('p_grid')
    if grid is None:
        return tuple(Config.DEFAULT_P_GRID)
    if isinstance(grid, str):
        grid = [part for part in grid.split(',') if part.strip()]
    return tuple(bias.p for bias in bias_grid(grid))


def validate_params(kind, params):
    """Normalize job parameters; raises ValueError/BBLabError on bad input"""
    if kind not in JOB_KINDS:
        raise ValueError(f'Unknown job kind {kind!r}; expected one of {", ".join(JOB_KINDS)}')
    if not isinstance(params, dict):
        raise ValueError('Job params must be an object')
    normalized = {}

    if kind == 'verify':
        source = params.get('source', 'exhaustive')
        if source not in ('exhaustive', 'random'):
            raise ValueError(f'Unknown verify source {source!r}')
        normalized['source'] = source
        normalized['n'] = int(params['n'])
        normalized['p_grid'] = list(_p_grid(params))
        normalized['seed'] = int(params.get('seed', Config.DEFAULT_SEED))
        if source == 'random':
            normalized['count'] = int(params.get('count', 100))
        if params.get('chain'):
            normalized['chain'] = Chain.parse(params['chain'], normalized['n']).to_string()
        return normalized

    mode = params.get('mode', EXHAUSTIVE)
    if mode not in MODES:
        raise ValueError(f'Unknown search mode {mode!r}')
    normalized['mode'] = mode
    normalized['seed'] = int(params.get('seed', Config.DEFAULT_SEED))
    normalized['top_k'] = int(params.get('top_k', Config.LEADERBOARD_K))
    if mode == REFINE:
        normalized['tt'] = parse_truth_table(params['tt']).to_string()
        normalized['p'] = Bias(params['p']).p
        normalized['budget'] = int(params.get('budget', 1000))
        return normalized
    normalized['n'] = int(params['n'])
    normalized['p_grid'] = list(_p_grid(params)) if 'p' not in params else [Bias(params['p']).p]
    normalized['dedup_permutations'] = bool(params.get('dedup_permutations', False))
    if mode == RANDOM:
        normalized['samples'] = int(params.get('samples', 10000))
    return normalized


def execute(kind, params, workers=1):
    """Run a validated job and return the report object"""
    if kind == 'verify':
        n = params['n']
        if params['source'] == 'random':
            source = RandomSource(n, params['count'], params['seed'])
        else:
            source = ExhaustiveSource(n)
        chain = Chain.parse(params['chain'], n) if params.get('chain') else None
        return run_suite(source, params['p_grid'], chain, params['seed'], workers)

    mode = params['mode']
    if mode == REFINE:
        return refine_search(parse_truth_table(params['tt']), Bias(params['p']), params['budget'],
                             params['seed'], params['top_k'])
    if len(params['p_grid']) > 1:
        return p_sweep(params['n'], params['p_grid'], mode, params.get('samples'), params['seed'],
                       params['top_k'], workers, params['dedup_permutations'])
    bias = Bias(params['p_grid'][0])
    if mode == RANDOM:
        return random_search(params['n'], bias, params['samples'], params['seed'], params['top_k'], workers)
    return exhaustive_search(params['n'], bias, params['top_k'], params['dedup_permutations'], workers)


class JobScheduler:
    """Background runner for verify/search requests"""

    def __init__(self, app, background=True):
        self.app = app
        self.archive = RunArchive()
        self.scheduler = None
        self.background = background
        self._threads = []

        if not background:
            logger.info("Job Scheduler running jobs inline")
        elif APSCHEDULER_AVAILABLE:
            self.scheduler = BackgroundScheduler(timezone=Config.TIMEZONE)
            self.scheduler.start()
            logger.info("Job Scheduler initialized")
        else:
            logger.warning("APScheduler not installed - jobs run on plain threads")
            logger.warning("Install with: pip install apscheduler")

    def submit(self, kind, params):
        """
        Queue a job

        Returns:
            AnalysisJob: the queued job row
        """
        normalized = validate_params(kind, params)
        job = AnalysisJob(kind=kind, params_json=json.dumps(normalized), status='queued')
        db.session.add(job)
        db.session.commit()
        job_id = job.id

        if not self.background:
            self.run_job(job_id)
        elif self.scheduler:
            self.scheduler.add_job(
                func=self.run_job,
                trigger=DateTrigger(run_date=datetime.now(self.scheduler.timezone)),
                args=[job_id],
                id=f'analysis_job_{job_id}',
                name=f'{kind} job {job_id}',
                replace_existing=True
            )
        else:
            thread = threading.Thread(target=self.run_job, args=(job_id,), daemon=True)
            self._threads = [t for t in self._threads if t.is_alive()]
            self._threads.append(thread)
            thread.start()

        logger.info(f"Queued {kind} job {job_id}")
        return job

    def run_job(self, job_id):
        """Execute a queued job and record its outcome"""
        with self.app.app_context():
            job = db.session.get(AnalysisJob, job_id)
            if not job:
                logger.error(f"Job {job_id} not found")
                return
            if job.status != 'queued':
                logger.warning(f"Job {job_id} already {job.status}")
                return

            job.status = 'running'
            job.started_at = datetime.utcnow()
            db.session.commit()

            try:
                params = json.loads(job.params_json)
                report = execute(job.kind, params, Config.WORKERS)
                if job.kind == 'verify':
                    run_id = self.archive.save_verification(report)
                    DiscordWebhook.notify_verification(report)
                else:
                    run_id = self.archive.save_search(report)
                    DiscordWebhook.notify_search(report)

                job.run_id = run_id
                job.status = 'done'
                logger.info(f"Job {job_id} finished (run {run_id})")
            except (BBLabError, ValueError, KeyError) as e:
                job.status = 'failed'
                job.message = str(e)
                logger.error(f"Job {job_id} failed: {e}")
            except Exception as e:
                job.status = 'failed'
                job.message = f'Internal error: {e}'
                logger.error(f"Error in job {job_id}: {e}", exc_info=True)

            job.finished_at = datetime.utcnow()
            db.session.commit()

    def wait(self, timeout=None):
        """Join fallback threads (tests and shutdown)"""
        for thread in self._threads:
            thread.join(timeout)

    def shutdown(self):
        """Shutdown the scheduler"""
        if self.scheduler and hasattr(self.scheduler, 'running') and self.scheduler.running:
            self.scheduler.shutdown()
            logger.info("Job Scheduler shut down")
        self.wait(timeout=1)
