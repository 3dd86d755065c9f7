/**
 * Typed client for the lectio HTTP API.
 *
 * The dashboard is a pure consumer: every number it renders comes straight
 * from these payloads, never recomputed client-side.
 */

export interface LectureRecord {
  lecture_id: string;
  title: string;
  duration: number | null;
  uploaded_at: string;
  source_uri: string | null;
  status: string;
}

export interface JobRecord {
  job_id: string;
  lecture_id: string;
  kind: string;
  state: string;
  error_message: string | null;
  created: string;
  finished: string | null;
}

export interface UploadResponse {
  lecture: LectureRecord;
  job_id: string | null;
}

export interface SummaryPayload {
  lecture_id: string;
  counts: Record<string, number>;
  durations: Record<string, number>;
  source: string;
  model_id: string | null;
}

export interface TimelineEntry {
  feature_id: string;
  start: number;
  end: number | null;
}

export interface SentenceRow {
  text: string;
  start: number;
  end: number;
}

export interface TrendsPayload {
  lectures: string[];
  per_feature: Record<string, Array<[number, number]>>;
}

export interface ModelDescriptor {
  model_id: string;
  task: string;
  backend: string;
  label_set: string[];
  threshold: number | Record<string, number>;
  endpoint: string | null;
  version: string;
}

/** Server-reported failure carrying the documented API error code. */
export class ApiError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  if (!response.ok) {
    let code = "internal";
    let message = `${response.status} ${response.statusText}`;
    try {
      const body = await response.json();
      if (body && body.code) {
        code = body.code;
        message = body.message ?? message;
      }
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(code, message);
  }
  return response.json() as Promise<T>;
}

export const api = {
  listLectures: () => request<LectureRecord[]>("/lectures"),

  uploadLecture: (form: FormData) =>
    request<UploadResponse>("/lectures", { method: "POST", body: form }),

  analyze: (lectureId: string, modelId: string) =>
    request<JobRecord>(
      `/lectures/${encodeURIComponent(lectureId)}/analyze?model=${encodeURIComponent(modelId)}`,
      { method: "POST" },
    ),

  getJob: (jobId: string) =>
    request<JobRecord>(`/jobs/${encodeURIComponent(jobId)}`),

  getSummary: (lectureId: string, source: string, modelId?: string) =>
    request<SummaryPayload>(withModel(
      `/lectures/${encodeURIComponent(lectureId)}/summary?source=${source}`, modelId)),

  getTimeline: (lectureId: string, source: string, modelId?: string) =>
    request<TimelineEntry[]>(withModel(
      `/lectures/${encodeURIComponent(lectureId)}/timeline?source=${source}`, modelId)),

  getSentences: (lectureId: string, featureId: string, modelId?: string) =>
    request<SentenceRow[]>(withModel(
      `/lectures/${encodeURIComponent(lectureId)}/features/${encodeURIComponent(featureId)}/sentences?`,
      modelId)),

  getTrends: (lectureIds: string[]) =>
    request<TrendsPayload>(`/trends?lectures=${lectureIds.map(encodeURIComponent).join(",")}`),

  listModels: () => request<ModelDescriptor[]>("/models"),

  registerModel: (descriptor: Partial<ModelDescriptor>, adminToken: string) =>
    request<ModelDescriptor>("/models", {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${adminToken}`,
      },
      body: JSON.stringify(descriptor),
    }),

  deleteModel: (modelId: string, adminToken: string) =>
    request<{ deleted: string }>(`/models/${encodeURIComponent(modelId)}`, {
      method: "DELETE",
      headers: { Authorization: `Bearer ${adminToken}` },
    }),
};

function withModel(url: string, modelId?: string): string {
  return modelId ? `${url}&model=${encodeURIComponent(modelId)}` : url;
}

/** Download link target for the stored transcript (server negotiates CSV). */
export function transcriptUrl(lectureId: string): string {
  return `/lectures/${encodeURIComponent(lectureId)}/transcript`;
}
