/**
 * DOM rendering and event wiring.
 *
 * The whole view re-renders from ViewState on every store change; all
 * user-provided text lands in the DOM through textContent, and password
 * cells render a masked placeholder only. Voice input appears only when
 * the browser exposes speech recognition; everything works by keyboard
 * without it.
 */

import { AppStore } from "./state.js";
import { ViewState } from "./state.js";

const PASSWORD_MASK = "••••••••";

type SpeechRecognitionCtor = new () => {
  lang: string;
  onresult: ((event: { results: { 0: { 0: { transcript: string } } } }) => void) | null;
  onerror: (() => void) | null;
  start: () => void;
};

function speechRecognitionAvailable(): SpeechRecognitionCtor | null {
  const w = window as unknown as Record<string, unknown>;
  return (
    (w["SpeechRecognition"] as SpeechRecognitionCtor | undefined) ??
    (w["webkitSpeechRecognition"] as SpeechRecognitionCtor | undefined) ??
    null
  );
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export class App {
  private editingUserId: number | null = null;
  private playedAudio: ArrayBuffer | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly store: AppStore,
  ) {
    store.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    const state = this.store.state;
    this.root.textContent = "";
    if (!state.user) {
      this.root.appendChild(this.loginView(state));
      return;
    }
    this.root.appendChild(this.mainView(state));
    this.maybePlayAudio(state);
  }

  // --- login ------------------------------------------------------------

  private loginView(state: ViewState): HTMLElement {
    const wrap = el("div", "login-page");
    const form = el("form", "login-form");
    form.appendChild(el("h1", "title", "slidetutor"));

    const username = el("input");
    username.name = "username";
    username.placeholder = "Username";
    username.autocomplete = "username";
    const password = el("input");
    password.name = "password";
    password.type = "password";
    password.placeholder = "Password";
    password.autocomplete = "current-password";
    const submit = el("button", "primary", "Sign in");
    submit.type = "submit";

    form.append(username, password, submit);
    if (state.loginError) {
      form.appendChild(el("p", "error login-error", state.loginError));
    }
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.store.login(username.value, password.value);
    });
    wrap.appendChild(form);
    return wrap;
  }

  // --- main layout --------------------------------------------------------

  private mainView(state: ViewState): HTMLElement {
    const wrap = el("div", state.fullscreen ? "app fullscreen" : "app");
    wrap.appendChild(this.topBar(state));
    const body = el("div", "body");
    if (!state.fullscreen) {
      body.appendChild(this.sidebar(state));
    }
    const content = el("div", "content");
    content.appendChild(this.slideViewer(state));
    if (state.user?.user_type === "admin") {
      content.appendChild(this.adminDashboard(state));
    }
    body.appendChild(content);
    wrap.appendChild(body);
    wrap.appendChild(this.chatArea(state));
    return wrap;
  }

  private topBar(state: ViewState): HTMLElement {
    const bar = el("header", "topbar");
    bar.appendChild(el("span", "course-title", state.courseTitle ?? "Course"));
    const who = el("span", "whoami", state.user ? state.user.username : "");
    const logout = el("button", "logout", "Log out");
    logout.addEventListener("click", () => void this.store.logout());
    bar.append(who, logout);
    return bar;
  }

  private sidebar(state: ViewState): HTMLElement {
    const nav = el("nav", "sidebar");
    nav.appendChild(el("h2", undefined, "Weeks"));
    const list = el("ul", "week-list");
    for (const week of state.weeks) {
      const item = el("li");
      const button = el(
        "button",
        week === state.currentWeek ? "week active" : "week",
        `Week ${week}`,
      );
      button.addEventListener("click", () => void this.store.selectWeek(week));
      item.appendChild(button);
      list.appendChild(item);
    }
    nav.appendChild(list);
    const slides = el("ul", "slide-list");
    for (const slide of state.slides) {
      const item = el("li");
      const button = el(
        "button",
        slide.slide === state.currentSlide ? "slide active" : "slide",
        `Slide ${slide.slide}`,
      );
      button.addEventListener("click", () =>
        void this.store.selectSlide(slide.week, slide.slide),
      );
      item.appendChild(button);
      slides.appendChild(item);
    }
    nav.appendChild(slides);
    return nav;
  }

  private slideViewer(state: ViewState): HTMLElement {
    const viewer = el("section", "slide-viewer");
    const heading =
      state.currentWeek !== null && state.currentSlide !== null
        ? `Week ${state.currentWeek}, slide ${state.currentSlide}`
        : "Select a slide";
    viewer.appendChild(el("h2", undefined, heading));

    if (state.slideMissing) {
      viewer.appendChild(el("div", "slide-placeholder", "Slide unavailable"));
    } else if (state.slideImage) {
      const img = el("img", "slide-image");
      img.alt = heading;
      const urlApi = (globalThis as { URL?: typeof URL }).URL;
      if (urlApi && typeof urlApi.createObjectURL === "function") {
        img.src = urlApi.createObjectURL(new Blob([state.slideImage], { type: "image/png" }));
      } else if (state.currentWeek !== null && state.currentSlide !== null) {
        img.src = `/weeks/${state.currentWeek}/slides/${state.currentSlide}/image`;
      }
      viewer.appendChild(img);
    }

    const controls = el("div", "slide-controls");
    const fullscreen = el(
      "button",
      "fullscreen-toggle",
      state.fullscreen ? "Exit full screen" : "Full screen",
    );
    fullscreen.addEventListener("click", () => this.store.toggleFullscreen());
    const transcript = el(
      "button",
      state.transcriptOn ? "transcript-toggle on" : "transcript-toggle",
      state.transcriptOn ? "Stop automatic teacher" : "Automatic teacher",
    );
    transcript.addEventListener("click", () => void this.store.toggleTranscript());
    controls.append(fullscreen, transcript);
    viewer.appendChild(controls);

    if (state.transcriptOn) {
      viewer.appendChild(
        el(
          "div",
          "transcript-panel",
          state.transcriptText ?? "No transcript for this slide.",
        ),
      );
    }
    return viewer;
  }

  // --- chat ---------------------------------------------------------------

  private chatArea(state: ViewState): HTMLElement {
    const wrap = el("div", "chat-area");
    const toggle = el(
      "button",
      "chat-toggle",
      state.chatOpen ? "Close chat" : "Ask the teacher",
    );
    toggle.addEventListener("click", () => this.store.toggleChat());
    wrap.appendChild(toggle);
    if (!state.chatOpen) {
      return wrap;
    }

    const popup = el("div", "chat-popup");
    const history = el("div", "chat-history");
    for (const bubble of state.messages) {
      const line = el(
        "div",
        bubble.degraded ? `bubble ${bubble.role} degraded` : `bubble ${bubble.role}`,
        bubble.text,
      );
      if (bubble.degraded) {
        line.title = "Served with reduced functionality";
      }
      history.appendChild(line);
    }
    popup.appendChild(history);
    if (state.chatNotice) {
      popup.appendChild(el("p", "error chat-notice", state.chatNotice));
    }

    const form = el("form", "chat-form");
    const input = el("input", "chat-input");
    input.placeholder = "Ask about this slide";
    input.disabled = state.chatPending;
    const send = el("button", "chat-send", state.chatPending ? "..." : "Send");
    send.type = "submit";
    send.disabled = state.chatPending;
    form.append(input, send);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const question = input.value;
      input.value = "";
      void this.store.sendChat(question);
    });
    popup.appendChild(form);

    const voice = el("div", "voice-controls");
    const voiceOut = el("label", "voice-out");
    const voiceOutBox = el("input");
    voiceOutBox.type = "checkbox";
    voiceOutBox.checked = state.voiceOut;
    voiceOutBox.addEventListener("change", () =>
      this.store.setVoiceOut(voiceOutBox.checked),
    );
    voiceOut.append(voiceOutBox, document.createTextNode(" Voice answers"));
    voice.appendChild(voiceOut);

    const recognition = speechRecognitionAvailable();
    if (recognition) {
      const mic = el("button", "voice-in", "Speak");
      mic.type = "button";
      mic.addEventListener("click", () => {
        const recognizer = new recognition();
        recognizer.lang = "en-US";
        recognizer.onresult = (event) => {
          void this.store.sendChat(event.results[0][0].transcript);
        };
        recognizer.onerror = () => undefined;
        recognizer.start();
      });
      voice.appendChild(mic);
    }
    popup.appendChild(voice);
    wrap.appendChild(popup);
    return wrap;
  }

  private maybePlayAudio(state: ViewState): void {
    if (!state.lastAudio || state.lastAudio === this.playedAudio) {
      return;
    }
    this.playedAudio = state.lastAudio;
    try {
      const urlApi = (globalThis as { URL?: typeof URL }).URL;
      if (!urlApi || typeof urlApi.createObjectURL !== "function") {
        return;
      }
      const url = urlApi.createObjectURL(
        new Blob([state.lastAudio], { type: "audio/wav" }),
      );
      const player = new Audio(url);
      void player.play()?.catch?.(() => undefined);
    } catch {
      // No audio stack in this environment; the text answer stands.
    }
  }

  // --- admin dashboard ------------------------------------------------------

  private adminDashboard(state: ViewState): HTMLElement {
    const panel = el("section", "admin-dashboard");
    panel.appendChild(el("h2", undefined, "User management"));
    if (state.adminError) {
      panel.appendChild(el("p", "error admin-error", state.adminError));
    }

    const form = el("form", "add-user-form");
    const username = el("input", "new-username");
    username.placeholder = "Username";
    const password = el("input", "new-password");
    password.type = "password";
    password.placeholder = "Password";
    const adminLabel = el("label", "admin-toggle-label");
    const adminToggle = el("input", "admin-toggle");
    adminToggle.type = "checkbox";
    adminLabel.append(adminToggle, document.createTextNode(" Admin"));
    const submit = el("button", "add-user", "Add user");
    submit.type = "submit";
    form.append(username, password, adminLabel, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.store.addUser(username.value, password.value, adminToggle.checked);
    });
    panel.appendChild(form);

    const table = el("table", "user-list");
    const head = el("tr");
    for (const column of ["ID", "Username", "Password", "Type", ""]) {
      head.appendChild(el("th", undefined, column));
    }
    table.appendChild(head);
    for (const user of state.users) {
      table.appendChild(
        this.editingUserId === user.user_id
          ? this.userEditRow(user.user_id, user.username, user.user_type)
          : this.userRow(user.user_id, user.username, user.user_type),
      );
    }
    panel.appendChild(table);
    return panel;
  }

  private userRow(id: number, username: string, userType: string): HTMLElement {
    const row = el("tr", "user-row");
    row.appendChild(el("td", undefined, String(id)));
    row.appendChild(el("td", "cell-username", username));
    row.appendChild(el("td", "cell-password", PASSWORD_MASK));
    row.appendChild(el("td", "cell-type", userType));
    const actions = el("td", "cell-actions");
    const edit = el("button", "edit-user", "Edit");
    edit.addEventListener("click", () => {
      this.editingUserId = id;
      this.render();
    });
    const remove = el("button", "delete-user", "Delete");
    remove.addEventListener("click", () => void this.store.removeUser(id));
    actions.append(edit, remove);
    row.appendChild(actions);
    return row;
  }

  private userEditRow(id: number, username: string, userType: string): HTMLElement {
    const row = el("tr", "user-row editing");
    row.appendChild(el("td", undefined, String(id)));
    const nameCell = el("td");
    const nameInput = el("input", "edit-username");
    nameInput.value = username;
    nameCell.appendChild(nameInput);
    const passCell = el("td");
    const passInput = el("input", "edit-password");
    passInput.type = "password";
    passInput.placeholder = "unchanged";
    passCell.appendChild(passInput);
    const typeCell = el("td");
    const adminBox = el("input", "edit-admin");
    adminBox.type = "checkbox";
    adminBox.checked = userType === "admin";
    const typeLabel = el("label");
    typeLabel.append(adminBox, document.createTextNode(" Admin"));
    typeCell.appendChild(typeLabel);
    const actions = el("td");
    const save = el("button", "save-user", "Save");
    save.addEventListener("click", () => {
      this.editingUserId = null;
      void this.store.editUser(id, {
        username: nameInput.value,
        password: passInput.value || undefined,
        user_type: adminBox.checked ? "admin" : "regular",
      });
    });
    const cancel = el("button", "cancel-edit", "Cancel");
    cancel.addEventListener("click", () => {
      this.editingUserId = null;
      this.render();
    });
    actions.append(save, cancel);
    row.append(nameCell, passCell, typeCell, actions);
    return row;
  }
}
