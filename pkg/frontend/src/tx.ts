/**
 * Client-side transaction construction and signing.
 *
 * The signature covers the canonical serialization of the five non-signature
 * fields, exactly as the ledger verifies it. Nonces are cached per session
 * and refetched after any rejection.
 */

import { ApiClient, ApiError, SubmitResult } from "./api.js";
import { canonicalBytes } from "./canonical.js";
import { SessionKey } from "./keys.js";

export async function buildSignedTx(
  key: SessionKey,
  txType: string,
  nonce: number,
  payload: Record<string, unknown>,
  timestamp?: number,
): Promise<Record<string, unknown>> {
  const body = {
    tx_type: txType,
    sender: key.address,
    nonce,
    payload,
    timestamp: timestamp ?? Math.floor(Date.now() / 1000),
  };
  const signature = await key.sign(canonicalBytes(body));
  return { ...body, signature };
}

export class TxSender {
  private nonce: number | null = null;

  constructor(
    readonly client: ApiClient,
    readonly key: SessionKey,
  ) {}

  private async nextNonce(): Promise<number> {
    if (this.nonce === null) {
      this.nonce = (await this.client.account(this.key.address)).nonce;
    }
    return this.nonce;
  }

  /** Submit one transaction; a Rejected receipt is thrown as ApiError. */
  async send(txType: string, payload: Record<string, unknown>, nonceOverride?: number): Promise<SubmitResult> {
    const nonce = nonceOverride ?? (await this.nextNonce());
    const tx = await buildSignedTx(this.key, txType, nonce, payload);
    const result = await this.client.submitTx(tx);
    if (result.receipt.status !== "Accepted") {
      this.nonce = null;
      throw new ApiError(result.receipt.reason ?? "Rejected", result.receipt.message ?? "");
    }
    this.nonce = nonce + 1;
    return result;
  }

  async register(role: string): Promise<SubmitResult> {
    const result = await this.send("RegisterAccount", { public_key: this.key.publicKey, role }, 0);
    this.nonce = 1;
    return result;
  }
}
