/** HTTP client for the inference service. */

import type { SkeletonDef } from "./math3.js";
import {
  decodeSkeleton,
  decodeTransitionResponse,
  encodeTransitionRequest,
  type TransitionRequest,
  type TransitionResponse,
} from "./schema.js";

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as Record<string, unknown>;
    if (typeof body["detail"] === "string") {
      const errors = body["errors"];
      if (Array.isArray(errors)) {
        const fields = errors
          .map((e) => `${(e as Record<string, unknown>)["field"]}: ${(e as Record<string, unknown>)["message"]}`)
          .join("; ");
        return `${body["detail"]} (${fields})`;
      }
      return body["detail"];
    }
  } catch {
    // fall through to the generic message
  }
  return `service returned ${response.status}`;
}

export class ServiceClient {
  constructor(public baseUrl: string, private fetchFn: typeof fetch = fetch) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw new ServiceError(response.status, await errorMessage(response));
    }
    return response;
  }

  async health(): Promise<{ status: string; model: string }> {
    const body = (await (await this.request("/health")).json()) as Record<string, unknown>;
    return { status: String(body["status"]), model: String(body["model"]) };
  }

  async skeleton(): Promise<SkeletonDef> {
    return decodeSkeleton(await (await this.request("/skeleton")).json());
  }

  private async transition(path: string, req: TransitionRequest, jointCount: number): Promise<TransitionResponse> {
    const response = await this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(encodeTransitionRequest(req)),
    });
    return decodeTransitionResponse(await response.json(), jointCount, req.length);
  }

  generate(req: TransitionRequest, jointCount: number): Promise<TransitionResponse> {
    return this.transition("/generate", req, jointCount);
  }

  interpolate(req: TransitionRequest, jointCount: number): Promise<TransitionResponse> {
    return this.transition("/interpolate", req, jointCount);
  }
}
