/**
 * Application state and the polling loop.
 *
 * Every view renders from this store; every mutation goes through the
 * service. Polls are numbered, and a response is applied only if no newer
 * poll has landed already, so overlapping polls can never interleave into
 * an inconsistent view. A network failure flips the store into an offline
 * banner with a retry action instead of tearing down the session.
 */

import {
  ApiClient,
  ApiError,
  ComplianceReport,
  HistoryEntry,
  ListingDoc,
  PhaseDoc,
  ServiceUnreachableError,
  SubmitResult,
  TokenDoc,
  TxReceipt,
} from "./api.js";
import { bannerText } from "./errors.js";
import { estimateFeeCents } from "./gas.js";
import { SessionKey } from "./keys.js";
import { TxSender } from "./tx.js";

export type ViewName = "marketplace" | "credits" | "history" | "rewards" | "compliance";

export interface Banner {
  kind: "error" | "offline" | "success";
  text: string;
  code?: string;
}

export interface PendingBuy {
  listing: ListingDoc;
  estimatedFeeCents: number;
}

export interface AppState {
  view: ViewName;
  session: SessionKey | null;
  balanceCents: number | null;
  rewardPoints: number | null;
  nonce: number | null;
  role: string | null;
  listings: ListingDoc[];
  myTokens: TokenDoc[];
  myOpenListings: ListingDoc[];
  history: HistoryEntry[];
  banner: Banner | null;
  pendingBuy: PendingBuy | null;
  lastReceipt: TxReceipt | null;
  report: ComplianceReport | null;
  phase: PhaseDoc | null;
  loginError: string | null;
}

export function initialState(): AppState {
  return {
    view: "marketplace",
    session: null,
    balanceCents: null,
    rewardPoints: null,
    nonce: null,
    role: null,
    listings: [],
    myTokens: [],
    myOpenListings: [],
    history: [],
    banner: null,
    pendingBuy: null,
    lastReceipt: null,
    report: null,
    phase: null,
    loginError: null,
  };
}

export class Store {
  state: AppState = initialState();
  private listeners: Array<(s: AppState) => void> = [];
  private sender: TxSender | null = null;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private pollSeq = 0;
  private lastApplied = 0;

  constructor(
    readonly client: ApiClient,
    readonly pollIntervalMs = 2000,
  ) {}

  subscribe(listener: (s: AppState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(partial: Partial<AppState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  setView(view: ViewName): void {
    this.update({ view });
  }

  clearBanner(): void {
    this.update({ banner: null });
  }

  private fail(err: unknown): void {
    if (err instanceof ServiceUnreachableError) {
      this.update({ banner: { kind: "offline", text: bannerText(err.code), code: err.code } });
    } else if (err instanceof ApiError) {
      this.update({ banner: { kind: "error", text: bannerText(err.code, err.message), code: err.code } });
    } else {
      this.update({ banner: { kind: "error", text: String(err) } });
    }
  }

  // -- session ------------------------------------------------------------

  async login(keyFileText: string): Promise<boolean> {
    try {
      const session = await SessionKey.fromKeyFile(keyFileText);
      this.sender = new TxSender(this.client, session);
      this.update({ session, loginError: null });
      await this.refresh();
      return true;
    } catch (err) {
      this.update({ loginError: err instanceof Error ? err.message : String(err) });
      return false;
    }
  }

  logout(): void {
    this.sender = null;
    this.update({
      ...initialState(),
      listings: this.state.listings,
      banner: null,
    });
  }

  // -- polling -------------------------------------------------------------

  startPolling(): void {
    if (this.pollTimer !== null) {
      return;
    }
    this.pollTimer = setInterval(() => {
      void this.refresh();
    }, this.pollIntervalMs);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  /** One poll cycle; stale responses (an older cycle resolving after a
   * newer one) are discarded by sequence number. */
  async refresh(): Promise<void> {
    const seq = ++this.pollSeq;
    try {
      const session = this.state.session;
      const [listings, account, tokens, history] = await Promise.all([
        this.client.listings("open"),
        session ? this.client.account(session.address) : Promise.resolve(null),
        session ? this.client.tokensByOwner(session.address) : Promise.resolve([]),
        session ? this.client.history(session.address) : Promise.resolve([]),
      ]);
      if (seq <= this.lastApplied) {
        return; // a newer poll already painted the screen
      }
      this.lastApplied = seq;
      const mine = new Set(tokens.map((t) => t.token_id));
      this.update({
        listings,
        myTokens: tokens,
        myOpenListings: listings.filter((l) => mine.has(l.token_id) && l.seller === session?.address),
        history: [...history].reverse(), // newest first
        balanceCents: account ? account.balance_cents : null,
        rewardPoints: account ? account.reward_points : null,
        nonce: account ? account.nonce : null,
        role: account ? account.role : null,
        banner: this.state.banner?.kind === "offline" ? null : this.state.banner,
      });
    } catch (err) {
      if (seq <= this.lastApplied) {
        return;
      }
      if (err instanceof ApiError && err.code === "NotFound" && this.state.session) {
        // Logged in with a key the ledger has not seen: show it plainly.
        this.update({
          banner: { kind: "error", text: bannerText("UnknownAccount"), code: "UnknownAccount" },
        });
        return;
      }
      this.fail(err);
    }
  }

  // -- trading actions --------------------------------------------------------

  requestBuy(listing: ListingDoc): void {
    this.update({
      pendingBuy: { listing, estimatedFeeCents: estimateFeeCents("Buy") },
    });
  }

  cancelBuyDialog(): void {
    this.update({ pendingBuy: null });
  }

  async confirmBuy(): Promise<void> {
    const pending = this.state.pendingBuy;
    if (!pending || !this.sender) {
      return;
    }
    this.update({ pendingBuy: null });
    await this.runTx(() => this.sender!.send("Buy", { listing_id: pending.listing.listing_id }));
  }

  async listToken(tokenId: number, priceCents: number): Promise<void> {
    await this.runTx(() => this.sender!.send("List", { token_id: tokenId, price_cents: priceCents }));
  }

  async cancelListing(listingId: number): Promise<void> {
    await this.runTx(() => this.sender!.send("CancelListing", { listing_id: listingId }));
  }

  async retire(tokenId: number): Promise<void> {
    await this.runTx(() => this.sender!.send("Retire", { token_id: tokenId }));
  }

  async deposit(amountCents: number): Promise<void> {
    await this.runTx(() => this.sender!.send("Deposit", { amount_cents: amountCents }));
  }

  private async runTx(action: () => Promise<SubmitResult>): Promise<void> {
    if (!this.sender) {
      this.update({ banner: { kind: "error", text: "Log in first." } });
      return;
    }
    try {
      const result = await action();
      this.update({
        lastReceipt: result.receipt,
        banner: {
          kind: "success",
          text: `Confirmed in block ${result.block_height}; fee ${result.receipt.fee_cents} cents.`,
        },
      });
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  // -- compliance ----------------------------------------------------------------

  async loadReport(regime: string, year: number, reported: number): Promise<void> {
    const session = this.state.session;
    if (!session) {
      return;
    }
    try {
      const [report, phase] = await Promise.all([
        this.client.complianceReport(session.address, regime, year, reported),
        this.client.cbamPhase(`${year}-12-31`),
      ]);
      this.update({ report, phase });
    } catch (err) {
      this.fail(err);
    }
  }
}
