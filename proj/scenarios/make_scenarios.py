#!/usr/bin/env python3
"""Regenerates the bundled scenario scripts (run from this directory)."""
import json
import math

TICK_US = 16_667


class Script:
    def __init__(self):
        self.lines = []
        self.seq = 0

    def _add(self, at_us, mtype, payload):
        self.seq += 1
        msg = {"type": mtype, "seq": self.seq, "payload": payload}
        self.lines.append({"at_us": at_us, "message": msg})

    def command(self, at_us, name, **args):
        self._add(at_us, "command", {"name": name, "args": args})

    def pose(self, at_us, device, role, pos):
        self._add(at_us, "pose_update", {
            "device_id": device,
            "role": role,
            "timestamp_us": at_us,
            "position": {"x": pos[0], "y": pos[1], "z": pos[2]},
            "orientation": {"w": 1.0, "x": 0.0, "y": 0.0, "z": 0.0},
        })

    def until(self, at_us):
        self.lines.append({"until_us": at_us})

    def write(self, path, header):
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# {header}\n")
            for line in self.lines:
                f.write(json.dumps(line, sort_keys=True, separators=(",", ":")) + "\n")


def r(x):
    return round(x, 6)


def presentation():
    s = Script()
    s.command(100_000, "next_slide")
    s.command(600_000, "next_slide")
    s.command(900_000, "set_tool", tool="write")
    s.command(950_000, "pen", device_id="pen", down=True, side="back")
    for k in range(30):
        t = 1_000_000 + k * 20_000
        s.pose(t, "pen", "right_hand", (r(-1.0 + 0.05 * k), r(0.4 + 0.2 * math.sin(k / 4)), -0.01))
    s.command(1_620_000, "pen", device_id="pen", down=False, side="back")
    s.command(1_700_000, "annotate", side="back", text="Saturn has rings", u=0.8, v=-0.6, height=0.15)
    s.command(2_000_000, "prev_slide")
    s.command(2_200_000, "set_tool", tool="present")
    s.until(2_500_000)
    return s


BODY = {
    "head": (0.0, 0.15, -1.0),
    "waist": (0.0, -0.5, -1.0),
    "left_foot": (0.15, -1.35, -1.0),
    "right_foot": (-0.15, -1.35, -1.0),
    "left_hand": (0.45, -0.4, -0.95),
    "right_hand": (-0.45, -0.4, -0.95),
}


def role_play():
    s = Script()
    for k in range(90):
        t = 100_000 + k * TICK_US
        sway = 0.4 * math.sin(k / 15)
        for role, (x, y, z) in BODY.items():
            lift = 0.5 * max(0.0, math.sin(k / 10)) if role == "right_hand" else 0.0
            s.pose(t, "tracker_" + role, role, (r(x + sway), r(y + lift), z))
        if k == 0:
            s.command(t, "set_tool", tool="role_play")
        if k in (20, 50, 80):
            s.command(t + 1, "freeze_afterimage")
    s.command(1_650_000, "clear_afterimages")
    s.until(1_700_000)
    return s


def ball_handoff():
    s = Script()
    s.command(50_000, "set_tool", tool="ball")
    # A physical ball carried toward the board from the front at 3 m/s,
    # rising at 45 degrees.
    v = 3.0 / math.sqrt(2.0)
    for k in range(80):
        t = 100_000 + k * 10_000
        dt = k * 0.01
        z = 1.0 - v * dt
        if z < -0.2:
            break
        s.pose(t, "ball", "ball", (0.3, r(0.0 + v * dt), r(z)))
    s.command(1_200_000, "throw_ball", direction=[0.0, 1.0, -1.0], speed=3.0)
    s.until(2_000_000)
    return s


if __name__ == "__main__":
    presentation().write("presentation.jsonl", "slides, pen stroke and an annotation on the back side")
    role_play().write("role_play_afterimage.jsonl", "six-tracker avatar with three frozen afterimages")
    ball_handoff().write("ball_handoff.jsonl", "physical ball crossing the board, then a virtual throw")
