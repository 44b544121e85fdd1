/**
 * DOM rendering. The whole app re-renders from store state on every
 * change; at this scale that is simpler and safer than incremental
 * updates, and it guarantees the screen always reflects one consistent
 * poll snapshot. Elements carry data-testid attributes for scripted tests.
 */

import { ListingDoc } from "./api.js";
import { formatCents } from "./gas.js";
import { AppState, Store, ViewName } from "./store.js";

const VIEWS: Array<{ id: ViewName; label: string }> = [
  { id: "marketplace", label: "Marketplace" },
  { id: "credits", label: "My Credits" },
  { id: "history", label: "History" },
  { id: "rewards", label: "Rewards" },
  { id: "compliance", label: "Compliance" },
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: Array<Node | string> = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function mount(root: HTMLElement, store: Store): void {
  store.subscribe(() => render(root, store));
  render(root, store);
}

export function render(root: HTMLElement, store: Store): void {
  const state = store.state;
  root.replaceChildren(
    header(state, store),
    bannerRegion(state, store),
    state.session ? mainRegion(state, store) : loginRegion(state, store),
    state.pendingBuy ? buyDialog(state, store) : "",
  );
}

function header(state: AppState, store: Store): HTMLElement {
  const tabs = VIEWS.map(({ id, label }) =>
    el(
      "button",
      {
        "data-testid": `tab-${id}`,
        class: state.view === id ? "tab active" : "tab",
      },
      [label],
    ),
  );
  tabs.forEach((tab, i) => tab.addEventListener("click", () => store.setView(VIEWS[i]!.id)));

  const who = state.session
    ? el("span", { class: "who", "data-testid": "who" }, [
        el("code", {}, [state.session.address.slice(0, 12) + "…"]),
        ` ${state.role ?? ""} · balance `,
        el("strong", { "data-testid": "balance" }, [
          state.balanceCents === null ? "—" : formatCents(state.balanceCents),
        ]),
      ])
    : el("span", { class: "who" }, ["not logged in"]);

  const logout = el("button", { class: "link", "data-testid": "logout" }, ["log out"]);
  logout.addEventListener("click", () => store.logout());

  return el("header", {}, [
    el("h1", {}, ["Carbon Credit Marketplace"]),
    el("nav", {}, state.session ? tabs : []),
    who,
    state.session ? logout : "",
  ]);
}

function bannerRegion(state: AppState, store: Store): HTMLElement {
  if (!state.banner) {
    return el("div", { class: "banner-slot" });
  }
  const { kind, text, code } = state.banner;
  const children: Array<Node | string> = [text];
  if (kind === "offline") {
    const retry = el("button", { "data-testid": "retry" }, ["Retry"]);
    retry.addEventListener("click", () => {
      store.clearBanner();
      void store.refresh();
    });
    children.push(retry);
  } else {
    const dismiss = el("button", { "data-testid": "dismiss" }, ["×"]);
    dismiss.addEventListener("click", () => store.clearBanner());
    children.push(dismiss);
  }
  return el(
    "div",
    {
      class: `banner-slot banner ${kind}`,
      "data-testid": "banner",
      "data-code": code ?? "",
    },
    children,
  );
}

function loginRegion(state: AppState, store: Store): HTMLElement {
  const input = el("textarea", {
    "data-testid": "keyfile-input",
    placeholder: "Paste the contents of your key file (JSON)",
    rows: "6",
  });
  const button = el("button", { "data-testid": "login" }, ["Log in"]);
  button.addEventListener("click", () => void store.login(input.value));
  const error = state.loginError
    ? el("p", { class: "error", "data-testid": "login-error" }, [state.loginError])
    : "";
  return el("section", { class: "login" }, [
    el("h2", {}, ["Log in"]),
    el("p", {}, ["Your key never leaves the browser; transactions are signed locally."]),
    input,
    button,
    error,
  ]);
}

function mainRegion(state: AppState, store: Store): HTMLElement {
  switch (state.view) {
    case "marketplace":
      return marketplaceView(state, store);
    case "credits":
      return creditsView(state, store);
    case "history":
      return historyView(state);
    case "rewards":
      return rewardsView(state);
    case "compliance":
      return complianceView(state, store);
  }
}

function marketplaceView(state: AppState, store: Store): HTMLElement {
  const mine = state.session?.address;
  const rows = state.listings.map((listing) => {
    const buy = el("button", { "data-testid": `buy-${listing.listing_id}` }, ["Buy"]);
    buy.addEventListener("click", () => store.requestBuy(listing));
    return el("tr", { "data-testid": `listing-${listing.listing_id}` }, [
      el("td", {}, [`#${listing.listing_id}`]),
      el("td", {}, [`token ${listing.token_id}`]),
      el("td", {}, [formatCents(listing.price_cents)]),
      el("td", {}, [listing.seller === mine ? "you" : listing.seller.slice(0, 12) + "…"]),
      el("td", {}, [listing.seller === mine ? "" : buy]),
    ]);
  });
  return el("section", { "data-testid": "view-marketplace" }, [
    el("h2", {}, ["Open listings"]),
    rows.length
      ? el("table", {}, [
          el("thead", {}, [
            el("tr", {}, [
              el("th", {}, ["listing"]),
              el("th", {}, ["credit"]),
              el("th", {}, ["price"]),
              el("th", {}, ["seller"]),
              el("th", {}, [""]),
            ]),
          ]),
          el("tbody", {}, rows),
        ])
      : el("p", { "data-testid": "no-listings" }, ["No open listings."]),
  ]);
}

function buyDialog(state: AppState, store: Store): HTMLElement {
  const pending = state.pendingBuy!;
  const total = pending.listing.price_cents + pending.estimatedFeeCents;
  const confirm = el("button", { "data-testid": "confirm-buy" }, ["Confirm purchase"]);
  confirm.addEventListener("click", () => void store.confirmBuy());
  const cancel = el("button", { "data-testid": "cancel-buy" }, ["Cancel"]);
  cancel.addEventListener("click", () => store.cancelBuyDialog());
  return el("div", { class: "dialog-backdrop" }, [
    el("div", { class: "dialog", "data-testid": "buy-dialog", role: "dialog" }, [
      el("h3", {}, [`Buy credit ${pending.listing.token_id}`]),
      el("p", {}, [
        `Price ${formatCents(pending.listing.price_cents)} + fee estimate `,
        el("span", { "data-testid": "fee-estimate" }, [formatCents(pending.estimatedFeeCents)]),
        ` ≈ ${formatCents(total)} total. The receipt shows the exact fee.`,
      ]),
      confirm,
      cancel,
    ]),
  ]);
}

function creditsView(state: AppState, store: Store): HTMLElement {
  const openByToken = new Map(state.myOpenListings.map((l) => [l.token_id, l] as [number, ListingDoc]));
  const rows = state.myTokens.map((token) => {
    const actions: Array<Node | string> = [];
    if (token.status === "Active") {
      const price = el("input", {
        type: "number",
        value: "150",
        "data-testid": `price-${token.token_id}`,
      });
      const list = el("button", { "data-testid": `list-${token.token_id}` }, ["List"]);
      list.addEventListener("click", () => void store.listToken(token.token_id, Number(price.value)));
      const retire = el("button", { "data-testid": `retire-${token.token_id}` }, ["Retire"]);
      retire.addEventListener("click", () => void store.retire(token.token_id));
      actions.push(price, list, retire);
    } else if (token.status === "Listed" && openByToken.has(token.token_id)) {
      const listing = openByToken.get(token.token_id)!;
      const cancel = el("button", { "data-testid": `cancel-${listing.listing_id}` }, [
        `Cancel listing #${listing.listing_id}`,
      ]);
      cancel.addEventListener("click", () => void store.cancelListing(listing.listing_id));
      actions.push(cancel);
    }
    return el("tr", { "data-testid": `token-${token.token_id}` }, [
      el("td", {}, [`#${token.token_id}`]),
      el("td", {}, [token.project_id]),
      el("td", {}, [String(token.vintage_year)]),
      el("td", { "data-testid": `token-status-${token.token_id}` }, [token.status]),
      el("td", {}, actions),
    ]);
  });
  return el("section", { "data-testid": "view-credits" }, [
    el("h2", {}, ["My credits (1 tCO₂e each)"]),
    rows.length
      ? el("table", {}, [el("tbody", {}, rows)])
      : el("p", {}, ["You own no credits."]),
  ]);
}

function historyView(state: AppState): HTMLElement {
  const rows = state.history.map((entry) =>
    el("li", { "data-testid": "history-entry" }, [
      el("code", {}, [`block ${entry.block_height}`]),
      ` ${entry.summary} `,
      el("small", {}, [entry.tx_hash.slice(0, 16) + "…"]),
    ]),
  );
  return el("section", { "data-testid": "view-history" }, [
    el("h2", {}, ["History (newest first, live)"]),
    rows.length ? el("ul", {}, rows) : el("p", {}, ["No transactions yet."]),
  ]);
}

function rewardsView(state: AppState): HTMLElement {
  return el("section", { "data-testid": "view-rewards" }, [
    el("h2", {}, ["Rewards"]),
    el("p", {}, [
      "Early-participation points: ",
      el("strong", { "data-testid": "reward-points" }, [String(state.rewardPoints ?? 0)]),
    ]),
  ]);
}

function complianceView(state: AppState, store: Store): HTMLElement {
  const year = el("input", { type: "number", value: "2026", "data-testid": "report-year" });
  const reported = el("input", { type: "number", value: "100", "data-testid": "report-emissions" });
  const regime = el("select", { "data-testid": "report-regime" }, [
    el("option", { value: "cca" }, ["CCA"]),
    el("option", { value: "cbam" }, ["CBAM"]),
    el("option", { value: "corsia" }, ["CORSIA"]),
  ]);
  const load = el("button", { "data-testid": "load-report" }, ["Load report"]);
  load.addEventListener("click", () =>
    void store.loadReport(regime.value, Number(year.value), Number(reported.value)),
  );

  const body: Array<Node | string> = [
    el("h2", {}, ["Compliance"]),
    el("div", { class: "controls" }, ["Regime ", regime, " Year ", year, " Reported tCO₂e ", reported, load]),
  ];
  if (state.phase) {
    body.push(
      el("p", {}, [
        "CBAM phase on ",
        state.phase.date,
        ": ",
        el("span", { class: "badge", "data-testid": "phase-badge" }, [state.phase.phase]),
        ` ${state.phase.requirements.join(", ")}`,
      ]),
    );
  }
  if (state.report) {
    const r = state.report;
    body.push(
      el("dl", { "data-testid": "report" }, [
        el("dt", {}, ["Reported emissions"]),
        el("dd", {}, [`${r.reported_emissions_tco2e} tCO₂e`]),
        el("dt", {}, ["Retired credits"]),
        el("dd", { "data-testid": "report-retired" }, [String(r.retired_credits)]),
        el("dt", {}, ["Net emissions"]),
        el("dd", { "data-testid": "report-net" }, [`${r.net_emissions_tco2e} tCO₂e`]),
        el("dt", {}, ["Obligations"]),
        el("dd", { "data-testid": "report-obligations" }, [JSON.stringify(r.obligations)]),
      ]),
    );
  }
  return el("section", { "data-testid": "view-compliance" }, body);
}
