import { ApiError } from "./api.js";

/**
 * Non-blocking notice strip. API errors surface with their server message;
 * network failures offer a retry affordance instead of dying silently.
 */

let host: HTMLElement | null = null;

export function mountNotices(element: HTMLElement): void {
  host = element;
}

export function notify(error: unknown, retry?: () => void): void {
  if (!host) return;
  const notice = document.createElement("div");
  notice.className = "notice";

  const text = document.createElement("span");
  if (error instanceof ApiError) {
    text.textContent = `${error.code}: ${error.message}`;
  } else {
    text.textContent = `network failure: ${(error as Error).message ?? error}`;
  }
  notice.appendChild(text);

  if (retry && !(error instanceof ApiError)) {
    const button = document.createElement("button");
    button.textContent = "retry";
    button.addEventListener("click", () => {
      notice.remove();
      retry();
    });
    notice.appendChild(button);
  }

  const dismiss = document.createElement("button");
  dismiss.textContent = "×";
  dismiss.className = "dismiss";
  dismiss.addEventListener("click", () => notice.remove());
  notice.appendChild(dismiss);

  host.appendChild(notice);
}
