/**
 * Session keys: key-file parsing and in-browser Ed25519 signing.
 *
 * The key file is the JSON written by `carbonmarket keygen` (hex address,
 * public key, private key). The private key never leaves this module as
 * anything but signatures: it is wrapped into a non-extractable WebCrypto
 * key at load time, and nothing here ever sends it over the wire.
 */

export interface KeyFileDoc {
  address: string;
  public_key: string;
  private_key: string;
}

// PKCS8 wrapper for a raw Ed25519 seed (RFC 8410 structure).
const PKCS8_ED25519_PREFIX = "302e020100300506032b657004220420";

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || /[^0-9a-f]/.test(hex)) {
    throw new Error("invalid hex string");
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function bytesToHex(bytes: Uint8Array): string {
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export async function sha256Hex(data: Uint8Array): Promise<string> {
  const digest = await crypto.subtle.digest("SHA-256", data as BufferSource);
  return bytesToHex(new Uint8Array(digest));
}

export class SessionKey {
  private constructor(
    readonly address: string,
    readonly publicKey: string,
    private readonly signingKey: CryptoKey,
  ) {}

  /** Parse and validate a key file; rejects files whose address does not
   * match the public key (a corrupted or edited file). A forged public
   * key that passes this check still fails at the service with
   * BadSignature, which the UI surfaces as a banner. */
  static async fromKeyFile(text: string): Promise<SessionKey> {
    let doc: KeyFileDoc;
    try {
      doc = JSON.parse(text);
    } catch {
      throw new Error("key file is not valid JSON");
    }
    if (!doc.address || !doc.public_key || !doc.private_key) {
      throw new Error("key file is missing address, public_key or private_key");
    }
    const derived = await sha256Hex(hexToBytes(doc.public_key));
    if (derived !== doc.address) {
      throw new Error("key file address does not match its public key");
    }
    const pkcs8 = hexToBytes(PKCS8_ED25519_PREFIX + doc.private_key);
    const signingKey = await crypto.subtle.importKey(
      "pkcs8",
      pkcs8 as BufferSource,
      { name: "Ed25519" },
      false,
      ["sign"],
    );
    return new SessionKey(doc.address, doc.public_key, signingKey);
  }

  async sign(data: Uint8Array): Promise<string> {
    const sig = await crypto.subtle.sign({ name: "Ed25519" }, this.signingKey, data as BufferSource);
    return bytesToHex(new Uint8Array(sig));
  }
}
