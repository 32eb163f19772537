// Affine, invertible mapping between world meters and screen pixels.
// World is y-up with the arena centered on the origin; screens are y-down.

export interface Point {
  x: number;
  y: number;
}

export interface ArenaMapping {
  readonly pxPerMeter: number;
  readonly screenWidth: number;
  readonly screenHeight: number;
  readonly arenaWidth: number;
  readonly arenaHeight: number;
}

export function fitArena(
  arenaWidth: number,
  arenaHeight: number,
  screenWidth: number,
  screenHeight: number,
  marginPx = 20
): ArenaMapping {
  const usableW = screenWidth - 2 * marginPx;
  const usableH = screenHeight - 2 * marginPx;
  if (usableW <= 0 || usableH <= 0) {
    throw new Error("canvas too small for the configured margin");
  }
  return {
    pxPerMeter: Math.min(usableW / arenaWidth, usableH / arenaHeight),
    screenWidth,
    screenHeight,
    arenaWidth,
    arenaHeight,
  };
}

export function worldToScreen(m: ArenaMapping, world: Point): Point {
  return {
    x: m.screenWidth / 2 + world.x * m.pxPerMeter,
    y: m.screenHeight / 2 - world.y * m.pxPerMeter,
  };
}

export function screenToWorld(m: ArenaMapping, screen: Point): Point {
  return {
    x: (screen.x - m.screenWidth / 2) / m.pxPerMeter,
    y: (m.screenHeight / 2 - screen.y) / m.pxPerMeter,
  };
}

export function insideArena(m: ArenaMapping, world: Point): boolean {
  return (
    Math.abs(world.x) <= m.arenaWidth / 2 && Math.abs(world.y) <= m.arenaHeight / 2
  );
}
