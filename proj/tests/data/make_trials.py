"""Writes the small synthetic trial table and lexicon used by the CLI tests."""
import random

rng = random.Random(11)
cues = ["Hund", "Katze", "Haus", "Baum", "Wasser", "Sonne", "Auto", "Buch"]
related = {
    "Hund": ["Katze", "bellen", "Knochen", "Leine", "Haus", "Tier"],
    "Katze": ["Hund", "Maus", "Tier", "miauen", "Fell", "Haus"],
    "Haus": ["Dach", "Wohnung", "Baum", "Tür", "Straße", "Auto"],
    "Baum": ["Blatt", "Wald", "Holz", "Bäume", "Haus", "Sonne"],
    "Wasser": ["nass", "Meer", "Sonne", "trinken", "blau", "Baum"],
    "Sonne": ["warm", "Licht", "Wasser", "gelb", "Sommer", "Baum"],
    "Auto": ["fahren", "Straße", "Rad", "Haus", "schnell", "Buch"],
    "Buch": ["lesen", "Seite", "Wort", "Auto", "Papier", "Katze"],
}
misspell = {"Straße": "Strasse", "Bäume": "Baeume", "Hund": "hund", "Tür": "Tuer"}
lexicon = sorted({w for ws in related.values() for w in ws} | set(cues) | {"kalt"})

header = ["participant_id", "age", "gender", "native_language", "education", "lat", "lon", "timestamp",
          "cue", "R1", "R1_marker", "R2", "R2_marker", "R3", "R3_marker"]
rows = []
genders = ["female", "male", "X", ""]
educations = ["higher", "high_school", "secondary", ""]
for p in range(1, 13):
    pid = f"p{p:02d}"
    age = str(18 + 4 * p) if p % 5 else ""
    demo = [pid, age, genders[p % 4], "Deutsch" if p % 6 else "Englisch", educations[p % 4],
            f"{47 + p * 0.1:.1f}" if p % 3 else "", f"{8 + p * 0.2:.1f}" if p % 3 else "",
            f"2024-03-{p:02d}T10:{p:02d}:00Z"]
    order = cues[:]
    rng.shuffle(order)
    for cue in order:
        words = rng.sample(related[cue], 3)
        slots = []
        for k, w in enumerate(words):
            if p == 12:
                slots.append((w + " und " + rng.choice(related[cue]).lower(), "response"))
            elif k == 2 and rng.random() < 0.1:
                slots.append(("", "no_more_responses"))
                break
            elif rng.random() < 0.05:
                slots.append(("", "unknown_word"))
            elif w in misspell and rng.random() < 0.5:
                slots.append((misspell[w], "response"))
            else:
                slots.append((w, "response"))
        while len(slots) < 3:
            slots.append(("", "missing"))
        row = demo + [cue]
        for text, marker in slots:
            row += [text, marker]
        rows.append(row)

with open("trials_small.tsv", "w", encoding="utf-8") as f:
    f.write("\t".join(header) + "\n")
    for r in rows:
        f.write("\t".join(r) + "\n")
with open("lexicon_small.txt", "w", encoding="utf-8") as f:
    f.write("\n".join(lexicon) + "\n")
