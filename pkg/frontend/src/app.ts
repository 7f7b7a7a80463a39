// Chat view over the dialog service: message bubbles, a collapsible
// per-turn debug panel, and an optional goal checklist.
//
// The server owns the dialog state. On load the app reuses the session id
// stored in localStorage (if the server still knows it) and rebuilds the
// transcript from GET /session/{id}; otherwise it starts a fresh session.

import { ApiError, DialogApi, type MessageReply, type TurnDebug } from "./api.js";
import { goalItems, parseGoal, updateGoalItems, type GoalItem } from "./goal.js";

const SESSION_KEY = "todkit.session";

export interface AppOptions {
  api?: DialogApi;
  storage?: Pick<Storage, "getItem" | "setItem" | "removeItem">;
}

export class ChatApp {
  readonly api: DialogApi;
  private readonly storage: AppOptions["storage"];
  sessionId = "";
  debugVisible = false;
  goal: GoalItem[] = [];
  private busy = false;

  private readonly messagesEl: HTMLElement;
  private readonly inputEl: HTMLTextAreaElement;
  private readonly sendEl: HTMLButtonElement;
  private readonly bannerEl: HTMLElement;
  private readonly goalEl: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    options: AppOptions = {},
  ) {
    this.api = options.api ?? new DialogApi();
    this.storage = options.storage ?? globalThis.localStorage;
    this.root.innerHTML = `
      <div class="banner" id="banner" hidden></div>
      <div class="layout">
        <div class="chat">
          <div class="messages" id="messages"></div>
          <form class="input-bar" id="input-bar">
            <textarea id="input" rows="1" placeholder="type a message"></textarea>
            <button id="send" type="submit">send</button>
          </form>
        </div>
        <aside class="side">
          <label class="debug-toggle">
            <input type="checkbox" id="debug-toggle"> show debug
          </label>
          <div class="goal" id="goal"></div>
        </aside>
      </div>`;
    this.messagesEl = this.query("#messages");
    this.inputEl = this.query("#input");
    this.sendEl = this.query("#send");
    this.bannerEl = this.query("#banner");
    this.goalEl = this.query("#goal");

    this.query<HTMLFormElement>("#input-bar").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.send(this.inputEl.value);
    });
    this.query<HTMLInputElement>("#debug-toggle").addEventListener("change", (ev) => {
      this.toggleDebug((ev.target as HTMLInputElement).checked);
    });
  }

  private query<T extends HTMLElement>(selector: string): T {
    const el = this.root.querySelector(selector);
    if (!el) throw new Error(`missing element ${selector}`);
    return el as T;
  }

  /** Reconnect to a stored session or create a new one, then render. */
  async start(): Promise<void> {
    const stored = this.storage?.getItem(SESSION_KEY) ?? "";
    if (stored) {
      try {
        const transcript = await this.api.getTranscript(stored);
        this.sessionId = stored;
        this.messagesEl.innerHTML = "";
        for (const message of transcript.transcript) {
          this.addBubble(message.role, message.text);
        }
        this.clearError();
        return;
      } catch (err) {
        if (!(err instanceof ApiError) || err.status !== 404) {
          this.showError(err);
          return;
        }
        this.storage?.removeItem(SESSION_KEY); // expired: fall through
      }
    }
    try {
      this.sessionId = await this.api.createSession();
      this.storage?.setItem(SESSION_KEY, this.sessionId);
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }

  async send(text: string): Promise<MessageReply | null> {
    text = text.trim();
    if (!text || this.busy || !this.sessionId) return null;
    this.busy = true;
    this.sendEl.disabled = true;
    this.addBubble("user", text);
    this.inputEl.value = "";
    try {
      const reply = await this.api.sendMessage(this.sessionId, text);
      this.addBubble("system", reply.response, reply);
      if (updateGoalItems(this.goal, reply)) this.renderGoal();
      this.clearError();
      return reply;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        // session expired server-side: offer a fresh start
        this.storage?.removeItem(SESSION_KEY);
        this.sessionId = "";
        this.showError(new ApiError(404, "session expired - reload to start over"));
      } else {
        this.showError(err);
      }
      return null;
    } finally {
      this.busy = false;
      this.sendEl.disabled = this.inputEl.disabled;
    }
  }

  toggleDebug(visible?: boolean): void {
    this.debugVisible = visible ?? !this.debugVisible;
    this.root.classList.toggle("debug-on", this.debugVisible);
    for (const panel of this.messagesEl.querySelectorAll(".debug")) {
      (panel as HTMLElement).hidden = !this.debugVisible;
    }
  }

  loadGoal(jsonText: string): void {
    this.goal = goalItems(parseGoal(jsonText));
    this.renderGoal();
  }

  get bubbles(): HTMLElement[] {
    return Array.from(this.messagesEl.querySelectorAll(".msg"));
  }

  private addBubble(role: "user" | "system", text: string, debug?: TurnDebug): void {
    const el = document.createElement("div");
    el.className = `msg ${role}`;
    const body = document.createElement("div");
    body.className = "text";
    body.textContent = text;
    el.appendChild(body);
    if (debug) {
      const panel = document.createElement("pre");
      panel.className = "debug";
      panel.hidden = !this.debugVisible;
      panel.textContent = [
        `raw:      ${debug.raw_response}`,
        `domain:   ${debug.domain}`,
        `belief:   ${debug.belief}`,
        `db match: ${debug.db_match}`,
        `template: ${debug.template}`,
        `events:   ${debug.tolerance_events.join(", ") || "-"}`,
      ].join("\n");
      el.appendChild(panel);
    }
    this.messagesEl.appendChild(el);
    this.messagesEl.scrollTop = this.messagesEl.scrollHeight;
  }

  private renderGoal(): void {
    this.goalEl.innerHTML = "";
    if (!this.goal.length) return;
    const heading = document.createElement("h2");
    heading.textContent = "your goal";
    this.goalEl.appendChild(heading);
    const list = document.createElement("ul");
    for (const item of this.goal) {
      const li = document.createElement("li");
      li.className = item.done ? "done" : "open";
      li.textContent = `[${item.domain}] ${item.label}`;
      list.appendChild(li);
    }
    this.goalEl.appendChild(list);
  }

  private showError(err: unknown): void {
    const message =
      err instanceof ApiError ? err.message : `unexpected error: ${String(err)}`;
    this.bannerEl.textContent = message;
    this.bannerEl.hidden = false;
    this.inputEl.disabled = true;
    this.sendEl.disabled = true;
  }

  private clearError(): void {
    this.bannerEl.hidden = true;
    this.bannerEl.textContent = "";
    this.inputEl.disabled = false;
    this.sendEl.disabled = false;
  }
}
