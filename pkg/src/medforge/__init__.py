"""medforge: bilingual English/Arabic medical corpus forge and evaluation toolkit.

Subpackages:
    gateway     -- chat-completion backends (HTTP, scripted mock, replay) with
                   retries, rate limiting, and an append-only replay log
    translate   -- iterative translate / score / refine loop with human-review
                   routing and audit sampling
    chat        -- MCQA-grounded multi-turn patient/doctor chat synthesis
    corpus      -- source ingestion, conversation rendering, bilingual mixing,
                   statistics and tuning manifests
    evalharness -- bilingual MCQA benchmark loading, querying, and reporting
    review      -- review queue store and its HTTP API (FastAPI)
"""

__version__ = "0.1.0"
