/**
 * Application state and transitions.
 *
 * The store owns the ViewState invariants: turning the transcript on
 * fetches the current slide's transcript, changing slides while it is on
 * refetches, and nothing is fetched while it is off. Chat keeps at most
 * one request in flight so conversation order stays unambiguous, and any
 * 401 drops the session back to the login screen.
 */

import { ApiClient, ApiError, ChatResponse, SlideInfo, UserInfo } from "./api.js";

export interface ChatBubble {
  role: "user" | "assistant";
  text: string;
  degraded?: boolean;
}

export interface ViewState {
  user: UserInfo | null;
  loginError: string | null;
  courseId: string | null;
  courseTitle: string | null;
  weeks: number[];
  slides: SlideInfo[];
  currentWeek: number | null;
  currentSlide: number | null;
  slideImage: ArrayBuffer | null;
  slideMissing: boolean;
  fullscreen: boolean;
  transcriptOn: boolean;
  transcriptText: string | null;
  chatOpen: boolean;
  voiceIn: boolean;
  voiceOut: boolean;
  messages: ChatBubble[];
  chatPending: boolean;
  chatNotice: string | null;
  lastAudio: ArrayBuffer | null;
  users: UserInfo[];
  adminError: string | null;
}

function initialState(): ViewState {
  return {
    user: null,
    loginError: null,
    courseId: null,
    courseTitle: null,
    weeks: [],
    slides: [],
    currentWeek: null,
    currentSlide: null,
    slideImage: null,
    slideMissing: false,
    fullscreen: false,
    transcriptOn: false,
    transcriptText: null,
    chatOpen: false,
    voiceIn: false,
    voiceOut: false,
    messages: [],
    chatPending: false,
    chatNotice: null,
    lastAudio: null,
    users: [],
    adminError: null,
  };
}

export type Listener = (state: ViewState) => void;

export class AppStore {
  state: ViewState = initialState();
  private listeners: Listener[] = [];

  constructor(readonly client: ApiClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    this.emit();
  }

  /** 401 anywhere mid-session drops back to the login screen. */
  private async guard<T>(work: () => Promise<T>): Promise<T | undefined> {
    try {
      return await work();
    } catch (error) {
      if (error instanceof ApiError && error.status === 401) {
        this.client.token = null;
        this.state = initialState();
        this.state.loginError = "Session expired, please sign in again.";
        this.emit();
        return undefined;
      }
      throw error;
    }
  }

  async login(username: string, password: string): Promise<boolean> {
    try {
      const result = await this.client.login(username, password);
      const courses = await this.client.courses();
      const course = courses[0] ?? null;
      const weeks = course ? await this.client.weeks(course.course_id) : [];
      this.update({
        user: result.user,
        loginError: null,
        courseId: course?.course_id ?? null,
        courseTitle: course?.title ?? null,
        weeks,
      });
      if (weeks.length > 0) {
        await this.selectWeek(weeks[0]);
      }
      return true;
    } catch (error) {
      if (error instanceof ApiError) {
        this.update({ loginError: error.message });
        return false;
      }
      this.update({ loginError: "Service unreachable, try again." });
      return false;
    }
  }

  async logout(): Promise<void> {
    await this.guard(() => this.client.logout());
    this.state = initialState();
    this.emit();
  }

  async selectWeek(week: number): Promise<void> {
    await this.guard(async () => {
      const slides = await this.client.slides(week);
      this.update({ currentWeek: week, slides });
      if (slides.length > 0) {
        await this.selectSlide(week, slides[0].slide);
      }
    });
  }

  async selectSlide(week: number, slide: number): Promise<void> {
    await this.guard(async () => {
      let image: ArrayBuffer | null = null;
      let missing = false;
      try {
        image = await this.client.slideImage(week, slide);
      } catch (error) {
        if (error instanceof ApiError && error.status === 404) {
          missing = true; // placeholder rendered instead
        } else {
          throw error;
        }
      }
      this.update({
        currentWeek: week,
        currentSlide: slide,
        slideImage: image,
        slideMissing: missing,
      });
      if (this.state.transcriptOn) {
        await this.fetchTranscript(week, slide);
      }
    });
  }

  private async fetchTranscript(week: number, slide: number): Promise<void> {
    try {
      const text = await this.client.transcript(week, slide);
      this.update({ transcriptText: text });
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.update({ transcriptText: null });
        return;
      }
      throw error;
    }
  }

  /** The automatic-teacher toggle: fetch on enable, silence when off. */
  async toggleTranscript(): Promise<void> {
    if (this.state.transcriptOn) {
      this.update({ transcriptOn: false, transcriptText: null });
      return;
    }
    this.update({ transcriptOn: true });
    if (this.state.currentWeek !== null && this.state.currentSlide !== null) {
      await this.guard(() =>
        this.fetchTranscript(this.state.currentWeek!, this.state.currentSlide!),
      );
    }
  }

  toggleFullscreen(): void {
    this.update({ fullscreen: !this.state.fullscreen });
  }

  toggleChat(): void {
    this.update({ chatOpen: !this.state.chatOpen });
  }

  setVoiceIn(on: boolean): void {
    this.update({ voiceIn: on });
  }

  setVoiceOut(on: boolean): void {
    this.update({ voiceOut: on });
  }

  /** One in-flight chat request at a time; answers jump to their slide. */
  async sendChat(question: string): Promise<ChatResponse | undefined> {
    if (this.state.chatPending || !question.trim()) {
      return undefined;
    }
    this.update({
      chatPending: true,
      chatNotice: null,
      messages: [...this.state.messages, { role: "user", text: question }],
    });
    try {
      const response = await this.guard(() =>
        this.client.chat({
          question,
          week: this.state.currentWeek ?? undefined,
          slide: this.state.currentSlide ?? undefined,
          want_audio: this.state.voiceOut,
        }),
      );
      if (!response) {
        return undefined;
      }
      this.update({
        messages: [
          ...this.state.messages,
          { role: "assistant", text: response.answer_text, degraded: response.degraded },
        ],
      });
      if (this.state.voiceOut && response.audio_url) {
        try {
          const audio = await this.client.audio(response.audio_url);
          this.update({ lastAudio: audio });
        } catch {
          // Voice is best-effort; the text answer is already on screen.
        }
      }
      // Jump to the slide the answer came from.
      if (response.week !== this.state.currentWeek) {
        const slides = await this.client.slides(response.week);
        this.update({ currentWeek: response.week, slides });
      }
      await this.selectSlide(response.week, response.slide);
      return response;
    } catch (error) {
      if (error instanceof ApiError) {
        this.update({
          chatNotice:
            error.status === 503
              ? "Assistant unavailable right now."
              : error.message,
        });
        return undefined;
      }
      throw error;
    } finally {
      this.update({ chatPending: false });
    }
  }

  // --- admin dashboard -------------------------------------------------

  async refreshUsers(): Promise<void> {
    await this.guard(async () => {
      const users = await this.client.listUsers("all");
      this.update({ users, adminError: null });
    });
  }

  async addUser(
    username: string,
    password: string,
    admin: boolean,
  ): Promise<void> {
    await this.adminAction(() =>
      this.client.createUser(username, password, admin ? "admin" : "regular"),
    );
  }

  async editUser(
    userId: number,
    fields: { username?: string; password?: string; user_type?: string },
  ): Promise<void> {
    const cleaned = Object.fromEntries(
      Object.entries(fields).filter(([, v]) => v !== undefined && v !== ""),
    );
    await this.adminAction(() => this.client.updateUser(userId, cleaned));
  }

  async removeUser(userId: number): Promise<void> {
    await this.adminAction(() => this.client.deleteUser(userId));
  }

  private async adminAction(work: () => Promise<unknown>): Promise<void> {
    try {
      await work();
      await this.refreshUsers();
    } catch (error) {
      if (error instanceof ApiError && error.status === 401) {
        this.client.token = null;
        this.state = initialState();
        this.state.loginError = "Session expired, please sign in again.";
        this.emit();
        return;
      }
      if (error instanceof ApiError) {
        this.update({ adminError: error.message });
        return;
      }
      throw error;
    }
  }
}
