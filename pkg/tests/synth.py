"""Small seeded generator of bAbI-dialog-format restaurant corpora.

Used by tests in place of the official Task 6 download, which is not
redistributable with the repo. The grammar mirrors the file format:
numbered lines, tab-separated turns, tabless KB-result lines.
"""

import random

CUISINES = ["italian", "spanish", "indian", "french", "thai", "british"]
LOCATIONS = ["north", "south", "centre", "east", "west"]
PRICES = ["cheap", "moderate", "expensive"]

ASK_PHONE = ["what is the phone number", "may i have the phone number", "phone number please"]
ASK_ADDR = ["what is the address", "whats the address", "can i get the address"]
BYE = ["thank you good bye", "bye", "thanks good bye"]
REQUESTS = [
    "i want {c} food in the {l}",
    "im looking for a {p} restaurant serving {c} food",
    "find me {c} food in the {l} part of town",
    "a {p} restaurant in the {l} please",
]


def generate_dialogue(rng: random.Random) -> list[str]:
    c = rng.choice(CUISINES)
    l = rng.choice(LOCATIONS)
    p = rng.choice(PRICES)
    name = f"{c}_{l}_house"
    lines = []
    n = 1

    def turn(user, system):
        nonlocal n
        lines.append(f"{n} {user}\t{system}")
        n += 1

    def kb(entity, rel, value):
        nonlocal n
        lines.append(f"{n} {entity} {rel} {value}")
        n += 1

    turn("<SILENCE>", "hello , welcome to the restaurant system . how may i help you ?")
    turn(rng.choice(REQUESTS).format(c=c, l=l, p=p), f"api_call {c} {l} {p}")
    kb(name, "R_cuisine", c)
    kb(name, "R_location", l)
    kb(name, "R_price", p)
    kb(name, "R_phone", f"{name}_phone")
    kb(name, "R_address", f"{name}_address")
    turn("<SILENCE>", f"{name} is a nice restaurant in the {l} of town serving {c} food")
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.5:
            turn(rng.choice(ASK_PHONE), f"the phone number of {name} is {name}_phone")
        else:
            turn(rng.choice(ASK_ADDR), f"{name} is on {name}_address")
    turn(rng.choice(BYE), "you are welcome")
    lines.append("")
    return lines


def generate_split(n_dialogues: int, seed: int) -> str:
    rng = random.Random(seed)
    lines = []
    for _ in range(n_dialogues):
        lines.extend(generate_dialogue(rng))
    return "\n".join(lines) + "\n"


def write_corpus(dir_path, n_train=40, n_dev=10, n_test=10, seed=0):
    """Write train/dev/test bAbI-format files; returns their paths."""
    paths = {}
    for name, n, s in (("train", n_train, seed), ("dev", n_dev, seed + 1), ("test", n_test, seed + 2)):
        path = dir_path / f"{name}.txt"
        path.write_text(generate_split(n, s), encoding="utf-8")
        paths[name] = path
    return paths
