/**
 * Hash-routed single-page app over the review service. All state of record
 * lives server-side: a full reload reconstructs every view from the API.
 */

import { ReviewApi } from './api.js';
import { el } from './dom.js';
import { renderQueueScreen } from './queue.js';
import { renderReviewScreen } from './review.js';

const POLL_INTERVAL_MS = 15_000;

function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('api');
  if (fromQuery) return fromQuery;
  return localStorage.getItem('medforge.apiUrl') ?? 'http://127.0.0.1:8080';
}

function reviewerTag(): string {
  let tag = localStorage.getItem('medforge.reviewerTag');
  if (!tag) {
    tag = window.prompt('Reviewer tag (shown in the audit log):') ?? 'anonymous';
    localStorage.setItem('medforge.reviewerTag', tag);
  }
  return tag;
}

export function start(root: HTMLElement): void {
  const api = new ReviewApi(baseUrl());
  const outlet = el('main', { class: 'outlet' });
  root.append(outlet);
  let pollTimer: number | undefined;

  const route = () => {
    if (pollTimer !== undefined) window.clearInterval(pollTimer);
    const hash = window.location.hash;
    const taskMatch = /^#\/tasks\/(.+)$/.exec(hash);
    if (taskMatch && taskMatch[1]) {
      const taskId = decodeURIComponent(taskMatch[1]);
      void renderReviewScreen(outlet, api, taskId, reviewerTag(), {
        onDecided: () => {
          window.setTimeout(() => {
            window.location.hash = '#/queue';
          }, 300);
        },
      });
    } else {
      void renderQueueScreen(outlet, api);
      pollTimer = window.setInterval(() => void renderQueueScreen(outlet, api), POLL_INTERVAL_MS);
    }
  };

  window.addEventListener('hashchange', route);
  route();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  start(document.getElementById('app') as HTMLElement);
}
