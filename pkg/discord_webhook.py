"""
Discord Webhook Integration
Posts conjecture violators and blocking suite failures as embeds to Discord
"""
import requests
import logging
from typing import Dict, List, Optional

from config import Config
from reports import utc_timestamp

logger = logging.getLogger(__name__)

# Embed fields are capped by Discord; extra violators are summarized
MAX_VIOLATOR_EMBEDS = 5


class DiscordWebhook:
    """
    Discord Webhook sender for findings
    """

    # Discord colors
    COLORS = {
        'violation': 0xFF0000,  # Red
        'suite_failure': 0xFFA500,  # Orange
    }

    FOOTER = 'Biased FEI Lab'

    @staticmethod
    def send_webhook(webhook_url: str, embed: Dict) -> bool:
        """
        Send embed to Discord webhook

        Args:
            webhook_url: Discord webhook URL
            embed: Embed data

        Returns:
            bool: Success status
        """
        if not webhook_url:
            return False

        try:
            payload = {
                'embeds': [embed]
            }

            response = requests.post(
                webhook_url,
                json=payload,
                timeout=10
            )

            if response.status_code == 204:
                logger.debug(f"Discord webhook sent successfully")
                return True
            else:
                logger.error(f"Discord webhook failed: {response.status_code} - {response.text}")
                return False

        except Exception as e:
            logger.error(f"Error sending Discord webhook: {e}")
            return False

    @staticmethod
    def create_violation_embed(record: Dict, h_q: float, timestamp: Optional[str] = None) -> Dict:
        """
        Create embed for a function below the conjectured constant

        Args:
            record: Extremal record dict (tt, n, p, entropy, sum_sq_influences, ratio, conjecture_slack)
            h_q: Conjectured constant h(q) at the record's p
            timestamp: ISO timestamp

        Returns:
            dict: Discord embed
        """
        timestamp = timestamp or utc_timestamp()
        tt = record['tt'] if len(record['tt']) <= 64 else record['tt'][:64] + '...'
        return {
            'title': '🚨 Conjecture Violator',
            'description': f'Ratio **{record["ratio"]:.12g}** below h(q) = {h_q:.12g}',
            'color': DiscordWebhook.COLORS['violation'],
            'fields': [
                {
                    'name': 'Truth table',
                    'value': f'`{tt}`',
                    'inline': False
                },
                {
                    'name': 'n / p',
                    'value': f'{record["n"]} / {record["p"]}',
                    'inline': True
                },
                {
                    'name': 'Entropy',
                    'value': f'{record["entropy"]:.12g}',
                    'inline': True
                },
                {
                    'name': 'Σ Inf²',
                    'value': f'{record["sum_sq_influences"]:.12g}',
                    'inline': True
                },
                {
                    'name': 'Slack',
                    'value': f'{record["conjecture_slack"]:.3e}',
                    'inline': True
                }
            ],
            'footer': {
                'text': DiscordWebhook.FOOTER
            },
            'timestamp': timestamp
        }

    @staticmethod
    def create_suite_failure_embed(report: Dict, timestamp: Optional[str] = None) -> Dict:
        """
        Create embed for a verification report with blocking failures

        Args:
            report: Verification report dict
            timestamp: ISO timestamp

        Returns:
            dict: Discord embed
        """
        timestamp = timestamp or utc_timestamp()
        failed = [c for c in report['checks'] if c['failures'] and c['name'] != 'conjecture']
        fields = [
            {
                'name': check['name'],
                'value': f'{check["failures"]}/{check["count"]} failed, worst slack {check["min_slack"]:.3e} '
                         f'at `{check["argmin_tt"]}` p={check["argmin_p"]}',
                'inline': False
            }
            for check in failed[:10]
        ]
        return {
            'title': '❌ Verification Suite Failed',
            'description': f'Suite **{report["suite"]}** has {len(failed)} failing checks',
            'color': DiscordWebhook.COLORS['suite_failure'],
            'fields': fields,
            'footer': {
                'text': DiscordWebhook.FOOTER
            },
            'timestamp': timestamp
        }

    @staticmethod
    def notify_search(report, webhook_url: Optional[str] = None) -> int:
        """
        Post every violator of a search or sweep report

        Returns:
            int: Number of embeds delivered
        """
        webhook_url = Config.WEBHOOK_URL if webhook_url is None else webhook_url
        if not webhook_url:
            return 0
        data = report.to_dict() if hasattr(report, 'to_dict') else report
        violators: List[tuple] = []
        for part in data.get('reports', [data]):
            violators.extend((record, part['h_q']) for record in part['violations'])

        sent = 0
        for record, h_q in violators[:MAX_VIOLATOR_EMBEDS]:
            if DiscordWebhook.send_webhook(webhook_url, DiscordWebhook.create_violation_embed(record, h_q)):
                sent += 1
        if len(violators) > MAX_VIOLATOR_EMBEDS:
            logger.warning(f"{len(violators) - MAX_VIOLATOR_EMBEDS} further violators not posted to Discord")
        return sent

    @staticmethod
    def notify_verification(report, webhook_url: Optional[str] = None) -> bool:
        """Post a suite failure embed when the report has blocking failures"""
        webhook_url = Config.WEBHOOK_URL if webhook_url is None else webhook_url
        if not webhook_url:
            return False
        data = report.to_dict() if hasattr(report, 'to_dict') else report
        if data.get('passed', True):
            return False
        return DiscordWebhook.send_webhook(webhook_url, DiscordWebhook.create_suite_failure_embed(data))
