#!/usr/bin/env python3
"""Regenerates include/capgym/render/font_data.hpp from DejaVu Sans Mono Bold."""
import sys
from PIL import Image, ImageDraw, ImageFont

FONT = "/usr/share/fonts/truetype/dejavu/DejaVuSansMono-Bold.ttf"
SIZE = 13
CELL_W, CELL_H, TOP = 8, 16, 1

font = ImageFont.truetype(FONT, SIZE)
rows_out = []
for code in range(32, 127):
    im = Image.new("L", (CELL_W, CELL_H + TOP + 2))
    ImageDraw.Draw(im).text((0, 0), chr(code), font=font, fill=255)
    rows = []
    for y in range(TOP, TOP + CELL_H):
        bits = 0
        for x in range(CELL_W):
            if im.getpixel((x, y)) > 110:
                bits |= 0x80 >> x
        rows.append(bits)
    rows_out.append((code, rows))

out = sys.stdout if len(sys.argv) < 2 else open(sys.argv[1], "w")
out.write("// Generated by tools/gen_font.py. Glyphs rasterized from DejaVu Sans Mono Bold\n")
out.write("// (Bitstream Vera license). Do not edit by hand.\n")
out.write("#pragma once\n\n#include <array>\n#include <cstdint>\n\nnamespace capgym::font_data {\n\n")
out.write(f"inline constexpr int kCellWidth = {CELL_W};\ninline constexpr int kCellHeight = {CELL_H};\n")
out.write("inline constexpr int kFirstChar = 32;\ninline constexpr int kLastChar = 126;\n")
out.write("inline constexpr int kNominalSize = %d;\n\n" % SIZE)
out.write(f"inline constexpr std::array<std::array<std::uint8_t, {CELL_H}>, 95> kGlyphs = {{{{\n")
for code, rows in rows_out:
    label = chr(code).replace("\\", "backslash")
    out.write("    {{" + ", ".join(f"0x{b:02x}" for b in rows) + f"}}}},  // {label}\n")
out.write("}};\n\n}  // namespace capgym::font_data\n")
