import pytest
import requests

from core import Bias
from discord_webhook import MAX_VIOLATOR_EMBEDS, DiscordWebhook
from verify import ExhaustiveSource, VerificationReport, run_suite

URL = 'https://discord.example/webhook'


class FakeResponse:
    def __init__(self, status_code):
        self.status_code = status_code
        self.text = 'error body'


@pytest.fixture
def posts(monkeypatch):
    sent = []

    def fake_post(url, json=None, timeout=None):
        sent.append((url, json))
        return FakeResponse(204)

    monkeypatch.setattr(requests, 'post', fake_post)
    return sent


def _violator(tt='0110', slack=-0.25):
    return {'tt': tt, 'n': 2, 'p': 0.3, 'entropy': 0.1, 'sum_sq_influences': 2.0, 'ratio': 0.05,
            'conjecture_slack': slack}


def test_send_webhook_success(posts):
    assert DiscordWebhook.send_webhook(URL, {'title': 'x'})
    assert posts == [(URL, {'embeds': [{'title': 'x'}]})]


def test_send_webhook_without_url(posts):
    assert not DiscordWebhook.send_webhook('', {'title': 'x'})
    assert posts == []


def test_send_webhook_failure_status(monkeypatch):
    monkeypatch.setattr(requests, 'post', lambda url, json=None, timeout=None: FakeResponse(500))
    assert not DiscordWebhook.send_webhook(URL, {'title': 'x'})


def test_send_webhook_exception(monkeypatch):
    def boom(url, json=None, timeout=None):
        raise requests.ConnectionError('offline')

    monkeypatch.setattr(requests, 'post', boom)
    assert not DiscordWebhook.send_webhook(URL, {'title': 'x'})


def test_violation_embed():
    embed = DiscordWebhook.create_violation_embed(_violator(), Bias(0.3).conjectured_constant,
                                                  timestamp='2024-01-01T00:00:00+00:00')
    assert embed['timestamp'] == '2024-01-01T00:00:00+00:00'
    assert embed['fields'][0]['value'] == '`0110`'
    assert embed['color'] == DiscordWebhook.COLORS['violation']


def test_notify_search_caps_embeds(posts):
    report = {'h_q': 0.4, 'violations': [_violator(tt=f'{i:04b}') for i in range(MAX_VIOLATOR_EMBEDS + 2)]}
    assert DiscordWebhook.notify_search(report, URL) == MAX_VIOLATOR_EMBEDS
    assert len(posts) == MAX_VIOLATOR_EMBEDS


def test_notify_search_without_violations(posts):
    assert DiscordWebhook.notify_search({'h_q': 0.4, 'violations': []}, URL) == 0
    assert DiscordWebhook.notify_search({'h_q': 0.4, 'violations': [_violator()]}, '') == 0
    assert posts == []


def test_notify_verification(posts):
    passed = run_suite(ExhaustiveSource(1), p_grid=[0.3])
    assert not DiscordWebhook.notify_verification(passed, URL)

    failing = VerificationReport('exhaustive(1)', 1, [0.3], None, '1')
    failing.checks['parseval'].failures = 1
    failing.checks['parseval'].count = 1
    failing.checks['parseval'].min_slack = -1e-3
    failing.checks['parseval'].argmin_tt = '01'
    failing.checks['parseval'].argmin_p = 0.3
    assert DiscordWebhook.notify_verification(failing, URL)
    embed = posts[0][1]['embeds'][0]
    assert embed['fields'][0]['name'] == 'parseval'
