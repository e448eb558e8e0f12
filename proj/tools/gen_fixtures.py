#!/usr/bin/env python3
"""Writes the fixture sets under data/fixtures/. Deterministic; rerun after edits."""

import json
import random
import shutil
from datetime import datetime, timedelta, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
OUT = DATA / "fixtures"

MALE, FEMALE = "Q6581097", "Q6581072"

EN_MONTHS = ["January", "February", "March", "April", "May", "June", "July", "August",
             "September", "October", "November", "December"]
ES_MONTHS = ["enero", "febrero", "marzo", "abril", "mayo", "junio", "julio", "agosto",
             "septiembre", "octubre", "noviembre", "diciembre"]

# (id, name en, name es)
COUNTRIES = {
    "greece": ("Q9200001", "Greece", "Grecia"),
    "nigeria": ("Q9200002", "Nigeria", "Nigeria"),
    "usa": ("Q9200003", "United States", "Estados Unidos"),
    "spain": ("Q9200004", "Spain", "España"),
    "colombia": ("Q9200005", "Colombia", "Colombia"),
    "france": ("Q9200006", "France", "Francia"),
    "germany": ("Q9200007", "Germany", "Alemania"),
    "argentina": ("Q9200008", "Argentina", "Argentina"),
    "canada": ("Q9200009", "Canada", "Canadá"),
    "japan": ("Q9200010", "Japan", "Japón"),
}

CITIES = {
    "athens": ("Q9300001", "Athens", "Atenas"),
    "akron": ("Q9300002", "Akron", "Akron"),
    "madrid": ("Q9300003", "Madrid", "Madrid"),
    "bogota": ("Q9300004", "Bogotá", "Bogotá"),
    "paris": ("Q9300005", "Paris", "París"),
    "munich": ("Q9300006", "Munich", "Múnich"),
    "rosario": ("Q9300007", "Rosario", "Rosario"),
    "toronto": ("Q9300008", "Toronto", "Toronto"),
    "osaka": ("Q9300009", "Osaka", "Osaka"),
    "seville": ("Q9300010", "Seville", "Sevilla"),
    "lyon": ("Q9300011", "Lyon", "Lyon"),
    "chicago": ("Q9300012", "Chicago", "Chicago"),
}

# name, birth name, (y, m, d) born, died or None, city, countries, height cm, weight kg,
# twitter, net worth in millions of USD
PEOPLE = [
    ("Giannis Antetokounmpo", "Giannis Sina Ugo Antetokounmpo", (1994, 12, 6), None, "athens",
     ["greece", "nigeria"], 211, 110, "Giannis_An34", 50),
    ("Ana Belén Ortega", "Ana Belén Ortega Ruiz", (1988, 3, 14), None, "madrid", ["spain"], 184,
     68, "anabelen", 3),
    ("Marcus Hale", "Marcus Anthony Hale", (1979, 7, 2), None, "akron", ["usa"], 198, 102,
     "marcushale", 120),
    ("Lucía Restrepo", None, (1991, 1, 23), None, "bogota", ["colombia"], 171, 59,
     "luciarestrepo", None),
    ("Étienne Moreau", "Étienne Paul Moreau", (1965, 11, 30), (2019, 4, 8), "paris", ["france"],
     179, 77, None, None),
    ("Hannah Weber", "Hannah Louise Weber", (1983, 5, 17), None, "munich", ["germany"], 168, 61,
     "hweber", 12),
    ("Tomás Aguirre", "Tomás Ignacio Aguirre", (1996, 9, 9), None, "rosario", ["argentina"], 176,
     72, "tomasaguirre", None),
    ("Priya Nair", None, (1990, 2, 28), None, "toronto", ["canada"], 163, 54, "priyanair", 7),
    ("Kenji Watanabe", "Kenji Watanabe", (1972, 10, 12), None, "osaka", ["japan"], 172, 70,
     None, None),
    ("Carmen Vidal", "María del Carmen Vidal", (1958, 6, 21), (2021, 12, 1), "seville",
     ["spain"], 160, 58, None, None),
    ("Julien Roux", None, (1985, 8, 4), None, "lyon", ["france"], 188, 84, "julienroux", None),
    ("DeShawn Carter", "DeShawn Michael Carter", (1993, 4, 11), None, "chicago", ["usa"], 206,
     113, "dcarter", 40),
    ("Sofía Márquez", "Sofía Elena Márquez", (1999, 12, 31), None, "madrid", ["spain",
     "argentina"], 174, 63, "sofiamarquez", None),
    ("Nikos Papadakis", "Nikolaos Papadakis", (1987, 3, 3), None, "athens", ["greece"], 195, 95,
     "npapadakis", None),
    ("Camila Ospina", "Camila Andrea Ospina", (1995, 7, 19), None, "bogota", ["colombia"], 166,
     57, None, 2),
    ("Lukas Schmidt", None, (1992, 11, 15), None, "munich", ["germany"], 190, 86, "lschmidt",
     None),
    ("Yuki Tanaka", "Tanaka Yuki", (2000, 1, 5), None, "osaka", ["japan"], 158, 49, "yukitanaka",
     None),
    ("Olivia Bennett", "Olivia Grace Bennett", (1981, 9, 27), None, "toronto", ["canada",
     "usa"], 170, 62, "oliviab", 25),
    ("Mateo Fernández", "Mateo Fernández López", (1989, 5, 8), None, "seville", ["spain"], 181,
     79, "mateofdz", None),
    ("Chloé Laurent", None, (1997, 2, 14), None, "lyon", ["france"], 165, 55, "chloelaurent",
     None),
    ("Isaiah Brooks", "Isaiah James Brooks", (1976, 12, 24), (2022, 6, 30), "akron", ["usa"],
     201, 108, None, None),
    ("Valentina Rossi Díaz", "Valentina Rossi Díaz", (1998, 8, 16), None, "rosario",
     ["argentina"], 169, 60, "valerossi", None),
    ("Dimitra Kostas", "Dimitra Kostas", (1984, 4, 2), None, "athens", ["greece"], 177, 66,
     "dkostas", None),
    ("Andrés Cabrera", None, (1990, 10, 10), None, "bogota", ["colombia", "spain"], 183, 81,
     "andrescabrera", 5),
    ("Grace Kim", "Grace Min-ji Kim", (1994, 6, 6), None, "chicago", ["usa"], 161, 52, "gracekim",
     None),
]


def header(schema):
    return json.dumps({"schema": schema, "version": 1})


def write_ndjson(path, schema, records):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(header(schema) + "\n")
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, ensure_ascii=False, indent=2)
        f.write("\n")


def slug(name):
    return name.replace(" ", "_")


def entity(eid, name, types, sitelinks=(), aliases=(), description=""):
    e = {"id": eid, "name": name, "types": types, "created_by": "seed",
         "aliases": [{"name": a, "lang": lang} for a, lang in aliases]}
    if sitelinks:
        e["sitelinks"] = list(sitelinks)
    if description:
        e["description"] = description
    return e


def row(key, value, links=()):
    """links: (surface text, entity id); offsets are UTF-8 byte offsets into value."""
    raw = value.encode("utf-8")
    out = []
    for surface, target in links:
        start = raw.index(surface.encode("utf-8"))
        out.append({"start": start, "end": start + len(surface.encode("utf-8")), "entity": target})
    return {"key": key, "value": value, "links": out}


def ts(dt):
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def en_date(d):
    y, m, day = d
    return f"{EN_MONTHS[m - 1]} {day}, {y}"


def es_date(d):
    y, m, day = d
    return f"{day} de {ES_MONTHS[m - 1]} de {y}"


def iso(d):
    return "%04d-%02d-%02d" % d


def en_height(cm):
    inches = round(cm / 2.54)
    return f"{cm / 100:.2f} m ({inches // 12} ft {inches % 12} in)"


def es_height(cm):
    return f"{cm / 100:.2f}".replace(".", ",") + " m"


def base_entities():
    out = [entity(MALE, "male", ["Q48277"]), entity(FEMALE, "female", ["Q48277"])]
    for cid, en, es in COUNTRIES.values():
        out.append(entity(cid, en, ["Q6256"], aliases=[(es, "es")] if es != en else []))
    for cid, en, es in CITIES.values():
        out.append(entity(cid, en, ["Q515"], aliases=[(es, "es")] if es != en else []))
    return out


def shared_paths():
    return {
        "ontology": "../../ontology.ndjson",
        "rules": ["../../rules/en.json", "../../rules/es.json", "../../rules/links.json"],
        "locales": "../../locale",
        "query_templates": "../../query_templates.ndjson",
        "question_templates": "../../questions.json",
        "link_rules": "../../link_rules.json",
    }


def golden():
    d = OUT / "golden"
    ents = base_entities()
    docs, facts = [], []
    t0 = datetime(2024, 3, 1, tzinfo=timezone.utc)
    for i, (name, birth, born, died, city, countries, cm, kg, tw, worth) in enumerate(PEOPLE):
        pid = "Q91%05d" % (i + 1)
        en_url = "https://en.example.org/wiki/" + slug(name)
        es_url = "https://es.example.org/wiki/" + slug(name)
        ents.append(entity(pid, name, ["Q5"], sitelinks=[en_url, es_url]))
        city_id, city_en, city_es = CITIES[city]
        lbs = round(kg * 2.20462)
        en_rows = [
            row("Born", en_date(born)),
            row("Place of birth", f"{city_en}, {COUNTRIES[countries[0]][1]}", [(city_en, city_id)]),
            row("Nationality", ", ".join(COUNTRIES[c][1] for c in countries),
                [(COUNTRIES[c][1], COUNTRIES[c][0]) for c in countries]),
            row("Height", en_height(cm)),
            row("Weight", f"{lbs} lb ({kg} kg)"),
        ]
        es_rows = [
            row("Nacimiento", es_date(born)),
            row("Lugar de nacimiento", f"{city_es}, {COUNTRIES[countries[0]][2]}",
                [(city_es, city_id)]),
            row("Nacionalidad", ", ".join(COUNTRIES[c][2] for c in countries),
                [(COUNTRIES[c][2], COUNTRIES[c][0]) for c in countries]),
            row("Altura", es_height(cm)),
            row("Peso", f"{kg} kg"),
        ]
        if died:
            en_rows.insert(1, row("Died", en_date(died)))
            es_rows.insert(1, row("Fallecimiento", es_date(died)))
        if birth:
            en_rows.append(row("Birth name", birth))
        if tw:
            en_rows.append(row("Twitter", "@" + tw))
        if worth:
            en_rows.append(row("Net worth", f"US${worth} million"))
        rev_time = ts(t0 + timedelta(hours=i))
        passage = f"{name} was born on {en_date(born)} in {city_en}. {name} is {cm / 100:.2f} m tall."
        docs.append({"url": en_url, "lang": "en", "revision": "r1", "revision_time": rev_time,
                     "infobox": en_rows, "passages": [{"id": "p0", "text": passage}], "tables": []})
        docs.append({"url": es_url, "lang": "es", "revision": "r1", "revision_time": rev_time,
                     "infobox": es_rows, "passages": [], "tables": []})

        def fact(p, v):
            facts.append({"subject": pid, "predicate": p, "value": v})

        fact("P569", {"date": iso(born), "precision": "day"})
        if died:
            fact("P570", {"date": iso(died), "precision": "day"})
        fact("P19", {"entity": city_id})
        for c in countries:
            fact("P27", {"entity": COUNTRIES[c][0]})
        fact("P2048", {"quantity": cm, "unit": "cm"})
        fact("P2067", {"quantity": kg, "unit": "kg"})
        if birth:
            fact("P1477", {"text": birth, "lang": "en"})
        if tw:
            fact("P2002", {"external_id": tw, "scheme": "twitter"})
    write_ndjson(d / "entities.ndjson", "odke.entities", ents)
    write_ndjson(d / "corpus.ndjson", "odke.corpus", docs)
    write_ndjson(d / "golden.ndjson", "odke.golden", facts)
    cfg = {"schema": "odke.config", "version": 1, **shared_paths(),
           "entities": "entities.ndjson", "corpus": "corpus.ndjson", "golden": "golden.ndjson",
           "languages": ["en", "es"], "now": "2024-04-01T00:00:00Z",
           "targets": [{"entity_type": "Q5", "predicate": "P2048"},
                       {"entity_type": "Q5", "predicate": "P569"}]}
    write_json(d / "config.json", cfg)


def conflict():
    d = OUT / "conflict"
    pid = "Q9100001"
    urls = ["https://en.example.org/wiki/Giannis_Antetokounmpo",
            "https://stats.example.com/players/giannis-antetokounmpo",
            "https://news.example.net/profiles/antetokounmpo"]
    ents = base_entities() + [entity(pid, "Giannis Antetokounmpo", ["Q5"], sitelinks=urls)]
    values = ["2.13 m", "2.13 m", "211 cm"]
    docs = []
    for i, (url, v) in enumerate(zip(urls, values)):
        docs.append({"url": url, "lang": "en", "revision": "r1",
                     "revision_time": ts(datetime(2024, 3, 1 + i, tzinfo=timezone.utc)),
                     "infobox": [row("Height", v)], "passages": [], "tables": []})
    write_ndjson(d / "entities.ndjson", "odke.entities", ents)
    write_ndjson(d / "corpus.ndjson", "odke.corpus", docs)
    cfg = {"schema": "odke.config", "version": 1, **shared_paths(),
           "entities": "entities.ndjson", "corpus": "corpus.ndjson", "languages": ["en"],
           "now": "2024-04-01T00:00:00Z",
           "scoring": {"auto_threshold": 0.6, "curation_floor": 0.3, "merge_threshold": 0.005}}
    write_json(d / "config.json", cfg)


def stream():
    d = OUT / "stream"
    rng = random.Random(20240301)
    n_cities, n_events = 10, 200
    ents = base_entities()
    urls, pops = [], []
    for i in range(n_cities):
        cid = "Q94%05d" % (i + 1)
        name = "Streamville %d" % (i + 1)
        url = "https://en.example.org/wiki/" + slug(name)
        ents.append(entity(cid, name, ["Q515"], sitelinks=[url]))
        urls.append(url)
        pops.append(rng.randrange(50_000, 2_000_000))
    docs, events = [], []
    start = datetime(2024, 5, 1, 0, 3, tzinfo=timezone.utc)
    revisions = [0] * n_cities
    vandal = {37, 121}
    for k in range(n_events):
        i = k % n_cities
        t = start + timedelta(minutes=7 * k)
        revisions[i] += 1
        rev = "r%d" % revisions[i]
        if k in vandal:
            value = "0"
            flags = ["anonymous", "reverted"]
        else:
            pops[i] += rng.randrange(1, 5000)
            value = f"{pops[i]:,}"
            flags = ["anonymous"] if k % 11 == 0 else []
        docs.append({"url": urls[i], "lang": "en", "revision": rev, "revision_time": ts(t),
                     "infobox": [row("Population", value)], "passages": [], "tables": []})
        events.append({"url": urls[i], "revision": rev, "time": ts(t), "flags": flags})
    write_ndjson(d / "entities.ndjson", "odke.entities", ents)
    write_ndjson(d / "corpus.ndjson", "odke.corpus", docs)
    write_ndjson(d / "feed.ndjson", "odke.feed", events)
    cfg = {"schema": "odke.config", "version": 1, **shared_paths(),
           "entities": "entities.ndjson", "corpus": "corpus.ndjson", "feed": "feed.ndjson",
           "languages": ["en"], "now": "2024-05-01T00:00:00Z", "sla_minutes": 240,
           "poll_interval_minutes": 60, "processing_minutes": 5, "stream_predicates": ["P1082"]}
    write_json(d / "config.json", cfg)


def family():
    d = OUT / "family"
    people = {"A": "Q9500001", "B": "Q9500002", "C": "Q9500003", "D": "Q9500004",
              "E": "Q9500005", "F": "Q9500006", "G": "Q9500007", "H": "Q9500008"}
    ents = base_entities() + [entity(q, "Person " + k, ["Q5"]) for k, q in people.items()]
    prov = [{"url": "https://en.example.org/wiki/Family", "revision": "r1", "span": None,
             "extractor": "pattern:seed", "extracted_at": "2024-01-01T00:00:00Z", "run": "seed"}]

    def fact(s, p, o):
        return {"subject": people[s], "predicate": p, "object": {"entity": o}, "confidence": 0.95,
                "provenance": prov, "lang": "en", "status": "auto_ingested"}

    facts = [
        fact("A", "P26", people["B"]),
        fact("C", "P26", people["D"]),
        fact("E", "P21", MALE),
        fact("E", "P40", people["F"]),
        fact("G", "P21", FEMALE),
        fact("H", "P25", people["G"]),
    ]
    write_ndjson(d / "entities.ndjson", "odke.entities", ents)
    write_ndjson(d / "corpus.ndjson", "odke.corpus", [])
    write_ndjson(d / "facts.ndjson", "odke.facts", facts)
    cfg = {"schema": "odke.config", "version": 1, **shared_paths(),
           "entities": "entities.ndjson", "corpus": "corpus.ndjson",
           "now": "2024-06-01T00:00:00Z"}
    write_json(d / "config.json", cfg)


def main():
    if OUT.exists():
        shutil.rmtree(OUT)
    golden()
    conflict()
    stream()
    family()


if __name__ == "__main__":
    main()
