// Thin fetch client for the resetloop service. Every response is returned
// verbatim: the studio never computes control quantities locally.

import type { DesignRequest, DesignResponse, ServiceError } from './types'

export class ServiceValidationError extends Error {
  constructor(public payload: ServiceError) {
    super(payload.error.message)
  }
}

export interface ServiceClient {
  design(request: DesignRequest): Promise<DesignResponse>
  grid(): Promise<number[]>
}

export class HttpServiceClient implements ServiceClient {
  constructor(private base: string = '') {}

  async design(request: DesignRequest): Promise<DesignResponse> {
    const resp = await fetch(`${this.base}/design`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    })
    const payload = await resp.json()
    if (!resp.ok) {
      throw new ServiceValidationError(payload as ServiceError)
    }
    return payload as DesignResponse
  }

  async grid(): Promise<number[]> {
    const resp = await fetch(`${this.base}/grid`)
    const payload = await resp.json()
    if (!resp.ok) throw new ServiceValidationError(payload as ServiceError)
    return payload.omega as number[]
  }
}
