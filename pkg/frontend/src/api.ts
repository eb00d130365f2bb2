/**
 * Typed client for the slidetutor REST API.
 *
 * Every call goes through one request helper that records a request log,
 * so tests can prove the client never touches an undocumented endpoint.
 * The session token is attached as a bearer header; the service also sets
 * a cookie at login, which browsers use automatically.
 */

export interface UserInfo {
  user_id: number;
  username: string;
  user_type: "admin" | "regular";
}

export interface LoginResult {
  token: string;
  user: UserInfo;
}

export interface SlideInfo {
  week: number;
  slide: number;
  image_url: string;
  transcript_available: boolean;
}

export interface CourseInfo {
  course_id: string;
  title: string;
}

export interface ChatRequest {
  question: string;
  week?: number;
  slide?: number;
  want_audio?: boolean;
}

export interface ChatResponse {
  answer_text: string;
  doc_id: string;
  week: number;
  slide: number;
  image_url: string;
  transcript_available: boolean;
  degraded: boolean;
  audio_url?: string;
  query_used: string;
}

export interface RequestLogEntry {
  method: string;
  path: string;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Endpoint shapes the service documents; used by request-log assertions. */
export const DOCUMENTED_ENDPOINTS: RegExp[] = [
  /^POST \/login$/,
  /^POST \/logout$/,
  /^POST \/user$/,
  /^PUT \/user\/\d+$/,
  /^DELETE \/user\/\d+$/,
  /^GET \/users\/(all|admins|regular)$/,
  /^POST \/chat$/,
  /^GET \/courses$/,
  /^GET \/courses\/[^/]+\/weeks$/,
  /^GET \/weeks\/\d+\/slides$/,
  /^GET \/weeks\/\d+\/slides\/\d+\/image$/,
  /^GET \/weeks\/\d+\/slides\/\d+\/transcript$/,
  /^GET \/audio\/[0-9a-f]+$/,
];

export function isDocumented(entry: RequestLogEntry): boolean {
  const line = `${entry.method} ${entry.path}`;
  return DOCUMENTED_ENDPOINTS.some((pattern) => pattern.test(line));
}

export class ApiClient {
  token: string | null = null;
  readonly log: RequestLogEntry[] = [];
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    const impl = fetchImpl ?? (globalThis.fetch as FetchLike | undefined);
    if (!impl) {
      throw new Error("no fetch implementation available");
    }
    // Bind in case the default implementation needs its original receiver.
    this.fetchImpl = fetchImpl ?? ((input, init) => impl.call(globalThis, input, init));
  }

  private async request(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<Response> {
    this.log.push({ method, path });
    const headers: Record<string, string> = {};
    if (body !== undefined) {
      headers["content-type"] = "application/json";
    }
    if (this.token) {
      headers["authorization"] = `Bearer ${this.token}`;
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "error";
      let message = `${method} ${path} failed with ${response.status}`;
      try {
        const payload = await response.json();
        code = payload.error ?? code;
        message = payload.message ?? message;
      } catch {
        // Non-JSON error body; keep the generic message.
      }
      throw new ApiError(response.status, code, message);
    }
    return response;
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.request(method, path, body);
    return (await response.json()) as T;
  }

  async login(username: string, password: string): Promise<LoginResult> {
    const result = await this.json<LoginResult>("POST", "/login", {
      username,
      password,
    });
    this.token = result.token;
    return result;
  }

  async logout(): Promise<void> {
    await this.request("POST", "/logout");
    this.token = null;
  }

  createUser(
    username: string,
    password: string,
    userType: "admin" | "regular",
  ): Promise<UserInfo> {
    return this.json("POST", "/user", {
      username,
      password,
      user_type: userType,
    });
  }

  updateUser(
    userId: number,
    fields: { username?: string; password?: string; user_type?: string },
  ): Promise<UserInfo> {
    return this.json("PUT", `/user/${userId}`, fields);
  }

  async deleteUser(userId: number): Promise<void> {
    await this.request("DELETE", `/user/${userId}`);
  }

  listUsers(filter: "all" | "admins" | "regular" = "all"): Promise<UserInfo[]> {
    return this.json("GET", `/users/${filter}`);
  }

  chat(request: ChatRequest): Promise<ChatResponse> {
    return this.json("POST", "/chat", request);
  }

  courses(): Promise<CourseInfo[]> {
    return this.json("GET", "/courses");
  }

  weeks(courseId: string): Promise<number[]> {
    return this.json("GET", `/courses/${courseId}/weeks`);
  }

  slides(week: number): Promise<SlideInfo[]> {
    return this.json("GET", `/weeks/${week}/slides`);
  }

  async transcript(week: number, slide: number): Promise<string> {
    const payload = await this.json<{ text: string }>(
      "GET",
      `/weeks/${week}/slides/${slide}/transcript`,
    );
    return payload.text;
  }

  async slideImage(week: number, slide: number): Promise<ArrayBuffer> {
    const response = await this.request(
      "GET",
      `/weeks/${week}/slides/${slide}/image`,
    );
    return response.arrayBuffer();
  }

  async audio(audioUrl: string): Promise<ArrayBuffer> {
    const response = await this.request("GET", audioUrl);
    return response.arrayBuffer();
  }
}
