/**
 * Typed client for the trading service's JSON API.
 *
 * Every response body carries either `result` or `error: {code, message}`;
 * error envelopes become ApiError (the code drives the banner), network
 * failures become ServiceUnreachableError (the retry state).
 */

export class ApiError extends Error {
  constructor(readonly code: string, message: string) {
    super(message || code);
  }
}

export class ServiceUnreachableError extends Error {
  readonly code = "ServiceUnreachable";
}

export interface AccountDoc {
  address: string;
  role: string;
  balance_cents: number;
  reward_points: number;
  nonce: number;
  public_key: string;
}

export interface ListingDoc {
  listing_id: number;
  token_id: number;
  seller: string;
  price_cents: number;
  status: string;
  created_at: number;
}

export interface TokenDoc {
  token_id: number;
  project_id: string;
  vintage_year: number;
  status: string;
  owner: string;
  quantity_tco2e: number;
}

export interface HistoryEntry {
  block_height: number;
  tx_hash: string;
  tx_type: string;
  summary: string;
}

export interface TxReceipt {
  tx_hash: string;
  status: string;
  reason: string | null;
  message: string | null;
  gas_used: number;
  fee_cents: number;
}

export interface SubmitResult {
  tx_hash: string;
  block_height: number;
  receipt: TxReceipt;
}

export interface ComplianceReport {
  account: string;
  period: Record<string, unknown>;
  regime: string;
  reported_emissions_tco2e: number;
  retired_credits: number;
  net_emissions_tco2e: number;
  obligations: Record<string, unknown>;
}

export interface PhaseDoc {
  date: string;
  phase: string;
  requirements: string[];
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ServiceUnreachableError(String(err));
    }
    let doc: { result?: T; error?: { code: string; message: string } };
    try {
      doc = await response.json();
    } catch {
      throw new ApiError("MalformedResponse", `non-JSON response (${response.status})`);
    }
    if (doc.error) {
      throw new ApiError(doc.error.code, doc.error.message);
    }
    return doc.result as T;
  }

  listings(status?: string): Promise<ListingDoc[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request("GET", `/v1/listings${query}`);
  }

  tokensByOwner(address: string): Promise<TokenDoc[]> {
    return this.request("GET", `/v1/tokens?owner=${encodeURIComponent(address)}`);
  }

  account(address: string): Promise<AccountDoc> {
    return this.request("GET", `/v1/accounts/${address}`);
  }

  history(address: string): Promise<HistoryEntry[]> {
    return this.request("GET", `/v1/history/${address}`);
  }

  submitTx(tx: Record<string, unknown>): Promise<SubmitResult> {
    return this.request("POST", "/v1/tx", tx);
  }

  complianceReport(address: string, regime: string, year: number, reported: number): Promise<ComplianceReport> {
    const query = `address=${address}&regime=${regime}&year=${year}&reported=${reported}`;
    return this.request("GET", `/v1/compliance/report?${query}`);
  }

  cbamPhase(dateIso: string): Promise<PhaseDoc> {
    return this.request("GET", `/v1/compliance/cbam/phase?date=${dateIso}`);
  }

  auditVerify(): Promise<{ ok: boolean; failures: [number, string][] }> {
    return this.request("GET", "/v1/audit/verify");
  }
}
