/**
 * Local view state for one round of candidate review.
 *
 * Decisions are staged here and submitted in one atomic map, mirroring the
 * server's contract: every offered candidate needs a verdict before
 * anything is sent. The board therefore blocks an incomplete submission
 * locally, before any network call happens.
 */

export type Verdict = "accepted" | "rejected";

export class DecisionBoard {
  private readonly staged = new Map<string, Verdict>();
  readonly terms: readonly string[];

  constructor(terms: Iterable<string>) {
    this.terms = [...terms];
  }

  decide(term: string, verdict: Verdict): void {
    if (!this.terms.includes(term)) {
      throw new Error(`not a candidate this round: ${term}`);
    }
    this.staged.set(term, verdict);
  }

  clear(term: string): void {
    this.staged.delete(term);
  }

  verdictOf(term: string): Verdict | undefined {
    return this.staged.get(term);
  }

  get undecided(): string[] {
    return this.terms.filter((t) => !this.staged.has(t));
  }

  get complete(): boolean {
    return this.undecided.length === 0;
  }

  /** The submission map; throws while any candidate is still undecided. */
  toMap(): Record<string, Verdict> {
    const missing = this.undecided;
    if (missing.length > 0) {
      throw new Error(
        `cannot submit: undecided candidates: ${missing.join(", ")}`,
      );
    }
    const out: Record<string, Verdict> = {};
    for (const term of this.terms) {
      out[term] = this.staged.get(term) as Verdict;
    }
    return out;
  }
}

/** Documents that entered the relevant set since the previous iteration. */
export function newSinceLastIteration(
  relevant: readonly string[],
  previousRelevant: readonly string[] | null,
): Set<string> {
  if (previousRelevant === null) {
    return new Set(relevant);
  }
  const before = new Set(previousRelevant);
  return new Set(relevant.filter((doc) => !before.has(doc)));
}

/** Query terms that were accepted during the session (not seeds). */
export function acceptedTerms(
  query: readonly string[],
  seedQuery: readonly string[],
): string[] {
  const seeds = new Set(seedQuery);
  return query.filter((term) => !seeds.has(term));
}
