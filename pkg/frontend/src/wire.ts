/** Wire protocol types and per-session sequence ordering. */

export interface WireMessage {
  type: string;
  session: string;
  payload: Record<string, unknown>;
  seq: number;
}

export function isWireMessage(value: unknown): value is WireMessage {
  if (typeof value !== "object" || value === null) return false;
  const msg = value as Record<string, unknown>;
  return (
    typeof msg.type === "string" &&
    typeof msg.session === "string" &&
    typeof msg.payload === "object" &&
    msg.payload !== null &&
    typeof msg.seq === "number"
  );
}

/**
 * Reorders incoming messages into gapless seq order.
 *
 * Out-of-order frames are held until the gap fills; duplicates (a seq at or
 * below the delivery cursor, or already held) are dropped. Frames with
 * seq <= 0 carry no ordering guarantee and pass straight through.
 */
export class SeqBuffer {
  private next = 1;
  private held = new Map<number, WireMessage>();

  push(msg: WireMessage): WireMessage[] {
    if (msg.seq <= 0) return [msg];
    if (msg.seq < this.next || this.held.has(msg.seq)) return [];
    this.held.set(msg.seq, msg);
    const ready: WireMessage[] = [];
    while (this.held.has(this.next)) {
      ready.push(this.held.get(this.next)!);
      this.held.delete(this.next);
      this.next += 1;
    }
    return ready;
  }
}
