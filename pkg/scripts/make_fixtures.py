"""Regenerate the bundled databases, mini corpus and goal file.

Deterministic: running it twice produces identical files.  Outputs land
in src/todkit/data/.
"""

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from todkit.kb import Database  # noqa: E402
from todkit.simeval import generate_goals, save_goals  # noqa: E402

DATA = ROOT / "src" / "todkit" / "data"
DB = DATA / "db"

AREAS = ("north", "south", "center", "east", "west")
FOODS = ("chinese", "indian", "italian", "british", "thai")
PRICES = ("cheap", "moderate", "expensive")


def phone(rng):
    return "01223 " + "".join(str(rng.randrange(10)) for _ in range(6))


def postcode(rng):
    return "cb" + str(rng.randrange(1, 6)) + " " + str(rng.randrange(1, 10)) + random.Random(rng.random()).choice("abcdefgh") + random.Random(rng.random()).choice("abcdefgh")


def make_restaurants(rng):
    names = [
        "golden wok", "curry garden", "la margherita", "the oak bistro",
        "bangkok city", "royal spice", "pizza union", "the copper kettle",
        "jade fountain", "saffron house", "riverside brasserie", "lotus palace",
        "the eagle kitchen", "casa verde", "spice corner",
    ]
    rows = []
    for i, name in enumerate(names):
        rows.append({
            "name": name,
            "food": FOODS[i % len(FOODS)],
            "area": AREAS[i % len(AREAS)],
            "pricerange": PRICES[i % len(PRICES)],
            "phone": phone(rng),
            "address": f"{10 + i} mill road",
            "postcode": postcode(rng),
        })
    return rows


def make_hotels(rng):
    rows = []
    # exactly 33 guesthouses in the east
    for i in range(33):
        rows.append({
            "name": f"eastside guesthouse {i + 1}",
            "type": "guesthouse",
            "area": "east",
            "pricerange": PRICES[i % len(PRICES)],
            "stars": str(2 + i % 3),
            "phone": phone(rng),
            "address": f"{i + 1} newmarket road",
            "postcode": postcode(rng),
        })
    hotel_names = [
        "gonville hotel", "university arms", "royal cambridge", "the lensfield",
        "arundel house", "hamilton lodge", "ashley hotel", "warkworth house",
    ]
    for i, name in enumerate(hotel_names):
        rows.append({
            "name": name,
            "type": "hotel" if i % 2 == 0 else "guesthouse",
            "area": AREAS[i % 3],  # north, south, center only
            "pricerange": PRICES[(i + 1) % len(PRICES)],
            "stars": str(2 + i % 4),
            "phone": phone(rng),
            "address": f"{20 + i} chesterton lane",
            "postcode": postcode(rng),
        })
    return rows


def make_attractions(rng):
    # record order fixes distinct_values(area) = north, south, center, ...
    rows = [
        {"name": "abbey pool and astroturf pitch", "type": "swimming pool", "area": "north"},
        {"name": "byard art", "type": "museum", "area": "south"},
        {"name": "cambridge arts theatre", "type": "theatre", "area": "center"},
        {"name": "the fez club", "type": "nightclub", "area": "east"},
        {"name": "milton country park", "type": "park", "area": "west"},
        {"name": "castle street gallery", "type": "museum", "area": "north"},
        {"name": "riverside lido", "type": "swimming pool", "area": "south"},
        {"name": "corn exchange", "type": "theatre", "area": "center"},
        {"name": "botanic gardens", "type": "park", "area": "south"},
        {"name": "kettles yard", "type": "museum", "area": "west"},
    ]
    for row in rows:
        row["phone"] = phone(rng)
        row["address"] = f"{rng.randrange(1, 60)} regent street"
        row["postcode"] = postcode(rng)
    return rows


def make_trains(rng):
    rows = [{
        "id": "tr5933",
        "departure": "peterborough",
        "destination": "cambridge",
        "day": "tuesday",
        "leave": "15:19",
        "arrive": "16:07",
        "price": "33 pounds",
    }]
    stations = ("cambridge", "london", "ely", "norwich", "peterborough")
    days = ("monday", "tuesday", "wednesday", "thursday", "friday")
    k = 0
    for dep in stations:
        for dest in stations:
            if dep == dest or (dep, dest) == ("peterborough", "cambridge"):
                continue
            k += 1
            hour = 6 + k % 16
            rows.append({
                "id": f"tr{1000 + 37 * k}",
                "departure": dep,
                "destination": dest,
                "day": days[k % len(days)],
                "leave": f"{hour:02d}:{(k * 7) % 60:02d}",
                "arrive": f"{(hour + 1) % 24:02d}:{(k * 11) % 60:02d}",
                "price": f"{8 + k} pounds",
            })
    return rows


def make_taxis(rng):
    colors = ("black", "white", "red", "yellow", "blue", "grey")
    return [
        {"type": f"{c} skoda", "phone": phone(rng), "id": f"taxi{i + 1}"}
        for i, c in enumerate(colors)
    ]


def make_police(rng):
    return [{"name": "parkside police station", "phone": phone(rng),
             "address": "parkside avenue", "postcode": postcode(rng)}]


def make_hospital(rng):
    return [
        {"department": d, "phone": phone(rng)}
        for d in ("acute medicine", "cardiology", "neurology", "paediatrics")
    ]


# -- mini corpus -----------------------------------------------------------


def corpus_dialogs(db, rng):
    """Synthetic dialogs mirroring the simulator/oracle phrasing, plus a few
    hand-written ones covering multi-utterance merging and edge wording."""
    dialogs = []

    def sys_offer(domain, record, informed):
        ack = " ".join(f"the {s} is {v} ." for s, v in informed)
        offer_slot = {"train": "id", "taxi": "phone"}.get(domain, "name")
        offer = f"i can recommend {record[offer_slot]} . anything else ?"
        return (ack + " " + offer).strip()

    specs = [
        ("restaurant", ("food", "area"), ("phone", "address")),
        ("restaurant", ("pricerange",), ("phone",)),
        ("hotel", ("area", "type"), ("postcode",)),
        ("hotel", ("pricerange", "area"), ("phone", "address")),
        ("attraction", ("area",), ("address", "postcode")),
        ("attraction", ("type",), ("phone",)),
        ("train", ("departure", "destination"), ("id", "price")),
        ("train", ("day",), ("id",)),
        ("taxi", (), ("phone",)),
    ]
    idx = 0
    for rep in range(6):
        for domain, inf_slots, req_slots in specs:
            table = db.tables[domain]
            record = table[(idx * 7) % len(table)].attributes
            idx += 1
            informed = [(s, record[s]) for s in inf_slots if s in record]
            events = []
            intro = f"i am looking for a {domain} ."
            informs = " ".join(f"the {s} should be {v} ." for s, v in informed)
            belief = ""
            if informed:
                pairs = " , ".join(f"{s} = {v}" for s, v in informed)
                belief = f"{domain} {{ {pairs} }}"
            events.append({"speaker": "user", "text": (intro + " " + informs).strip()})
            events.append({
                "speaker": "system",
                "text": sys_offer(domain, record, informed),
                "belief": belief,
            })
            asked = [s for s in req_slots if s in record]
            if asked:
                events.append({
                    "speaker": "user",
                    "text": " ".join(f"what is the {s} ?" for s in asked),
                })
                events.append({
                    "speaker": "system",
                    "text": " ".join(f"the {s} is {record[s]} ." for s in asked),
                    "belief": belief,
                })
            events.append({"speaker": "user", "text": "thank you , goodbye ."})
            events.append({"speaker": "system", "text": "you are welcome . goodbye ."})
            dialogs.append({"id": f"syn{len(dialogs):03d}", "events": events})

    # guesthouse / pricerange wording from the hotel domain
    dialogs.append({
        "id": "hand001",
        "events": [
            {"speaker": "user", "text": "i want a place to stay in the east ."},
            {"speaker": "system",
             "text": "it is a guesthouse . there are 5 guesthouses in the area . "
                     "do you prefer cheap or moderate for the price range ?",
             "belief": "hotel { area = east }"},
            {"speaker": "user", "text": "cheap , please ."},
            {"speaker": "system",
             "text": "i can recommend eastside guesthouse 1 . anything else ?",
             "belief": "hotel { pricerange = cheap , area = east }"},
        ],
    })
    # consecutive user utterances that normalization must merge
    dialogs.append({
        "id": "hand002",
        "events": [
            {"speaker": "user", "text": "Hi"},
            {"speaker": "user", "text": "I need a restaurant in the north."},
            {"speaker": "system",
             "text": "i can recommend royal spice . anything else ?",
             "belief": "restaurant { area = north }"},
        ],
    })
    # slot alias that cleaning must normalize
    dialogs.append({
        "id": "hand003",
        "events": [
            {"speaker": "user", "text": "i need a train from ely ."},
            {"speaker": "system",
             "text": "where are you travelling to ?",
             "belief": "train { pickup_location = ely }"},
            {"speaker": "user", "text": "to london , please ."},
            {"speaker": "system",
             "text": "i can recommend tr1259 . anything else ?",
             "belief": "train { departure = ely , destination = london }"},
        ],
    })
    return dialogs


def main():
    rng = random.Random(20240817)
    DB.mkdir(parents=True, exist_ok=True)
    tables = {
        "restaurant": make_restaurants(rng),
        "hotel": make_hotels(rng),
        "attraction": make_attractions(rng),
        "train": make_trains(rng),
        "taxi": make_taxis(rng),
        "police": make_police(rng),
        "hospital": make_hospital(rng),
    }
    for domain, rows in tables.items():
        (DB / f"{domain}_db.json").write_text(
            json.dumps(rows, indent=1) + "\n", encoding="utf-8"
        )

    db = Database.load(DB)
    dialogs = corpus_dialogs(db, rng)
    with open(DATA / "mini_corpus.jsonl", "w", encoding="utf-8") as fh:
        for d in dialogs:
            fh.write(json.dumps(d) + "\n")

    goals = generate_goals(db, 10, seed=7)
    save_goals(goals, DATA / "goals.json")
    print(f"wrote {len(dialogs)} dialogs, {sum(len(r) for r in tables.values())} records, {len(goals)} goals")


if __name__ == "__main__":
    main()
