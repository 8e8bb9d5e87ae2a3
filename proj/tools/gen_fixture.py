#!/usr/bin/env python3
"""Generate the deterministic 200-movie fixture at data/movies.jsonl."""

import json
import random
import sys
from pathlib import Path

SEED = 20240611
COUNT = 200

CONTINENT = {
    "united states": "north america", "canada": "north america", "mexico": "north america",
    "brazil": "south america", "argentina": "south america",
    "france": "europe", "united kingdom": "europe", "italy": "europe", "germany": "europe",
    "spain": "europe", "sweden": "europe",
    "japan": "asia", "south korea": "asia", "india": "asia", "china": "asia",
    "nigeria": "africa", "south africa": "africa", "australia": "oceania",
}
COUNTRIES = sorted(CONTINENT)

DIRECTORS = [
    "Maren Holloway", "Dario Castellane", "Yuki Tanabe", "Olu Adeyemi", "Ingrid Solberg",
    "Rafael Montoya", "Claire Dufresne", "Hamish Grant", "Priya Raman", "Jonas Weller",
    "Lucia Ferraro", "Minjun Park", "Amelie Rousseau", "Viktor Kolar", "Sofia Albanese",
    "Tomasz Wronski", "Grace Okafor", "Henri Lavigne", "Nadia Petrova",
]
ACTORS = [
    "Elena Marchetti", "Jasper Whitfield", "Amara Nwosu", "Lukas Brenner", "Chloe Ashworth",
    "Mateo Ibarra", "Hana Kobayashi", "Declan Murphy", "Zara Qureshi", "Felix Lindqvist",
    "Ines Carvalho", "Omar Haddad", "Ruby Thornton", "Sebastian Kraus", "Mei Lin Zhao",
    "Theo Blackwood", "Anouk Fontaine", "Rohan Mehta", "Freya Halvorsen", "Marcus Delacroix",
    "Leila Farahani", "Callum Pierce", "Isabela Rocha", "Nikolai Volkov", "Tessa Langford",
    "Kwame Mensah", "Juliette Moreau", "Diego Salazar", "Astrid Nygaard", "Oscar Pemberton",
    "Yara Haddon", "Benedikt Vogel", "Camila Fuentes", "Arjun Kapoor", "Signe Dahl",
    "Leon Marchand", "Priscilla Oduya", "Gideon Sterling",
]
PORTMAN = "Natalie Portman"
SPIELBERG = "Steven Spielberg"

GENRES = list(range(1, 18))
KEYWORDS = [
    "space", "robots", "time travel", "zombies", "aliens", "dinosaurs", "heist", "revenge",
    "vampires", "sharks", "superheroes", "pirates", "spies", "dragons", "magic", "sports",
]
TIERS = ["g", "pg", "pg-13", "r", "nc-17"]
TIER_WEIGHTS = [2, 3, 4, 4, 1]

ADJ = ["Silent", "Crimson", "Last", "Hidden", "Broken", "Golden", "Midnight", "Distant", "Frozen",
       "Burning", "Lost", "Wild", "Quiet", "Electric", "Hollow", "Velvet", "Iron", "Paper", "Restless",
       "Secret", "Northern", "Falling", "Violet", "Endless"]
NOUN = ["Harbor", "Orchard", "Signal", "Kingdom", "River", "Letters", "Garden", "Station", "Mirror",
        "Horizon", "Lantern", "Canyon", "Voyage", "Promise", "Engine", "Island", "Archive", "Parade",
        "Frontier", "Echo", "Summer", "Compass", "Tide", "Carnival"]


def main(out_path: Path) -> None:
    rng = random.Random(SEED)
    titles = set()

    def title():
        while True:
            t = f"The {rng.choice(ADJ)} {rng.choice(NOUN)}"
            if t not in titles:
                titles.add(t)
                return t

    def countries_for(main):
        extra = rng.sample([c for c in COUNTRIES if c != main], rng.choice([0, 0, 0, 1, 1, 2]))
        return [main] + extra

    def movie(idx, **over):
        genres = over.pop("genre_ids", None) or sorted(rng.sample(GENRES, rng.choice([1, 1, 2, 2, 3])))
        main_country = over.pop("main_country", None) or rng.choice(
            ["united states"] * 6 + COUNTRIES)
        countries = over.pop("countries", None) or countries_for(main_country)
        continents = []
        for c in countries:
            if CONTINENT[c] not in continents:
                continents.append(CONTINENT[c])
        doc = {
            "id": f"m{idx:04d}",
            "title": title(),
            "release_year": over.pop("release_year", None) or rng.randint(1955, 2023),
            "audience_age": rng.choices(TIERS, TIER_WEIGHTS)[0],
            "quality_rating": round(rng.uniform(4.0, 9.5), 1),
            "genre_ids": genres,
            "directors": over.pop("directors", None) or [rng.choice(DIRECTORS)],
            "actors": over.pop("actors", None) or rng.sample(ACTORS, rng.choice([2, 3, 4])),
            "countries": countries,
            "continents": continents,
            "main_country": main_country,
            "main_continent": CONTINENT[main_country],
            "keywords": over.pop("keywords", None) or sorted(rng.sample(KEYWORDS, rng.choice([0, 1, 1, 2]))),
        }
        doc.update(over)
        return doc

    movies = []
    idx = 1

    def add(**over):
        nonlocal idx
        movies.append(movie(idx, **over))
        idx += 1

    # Natalie Portman: three comedies, three other films.
    for g in ([1], [1, 5], [1, 4]):
        add(genre_ids=g, actors=[PORTMAN] + rng.sample(ACTORS, 2))
    for g in ([4], [6], [7, 10]):
        add(genre_ids=g, actors=rng.sample(ACTORS, 1) + [PORTMAN])
    # Steven Spielberg films.
    for g, kw in (([10, 7], ["dinosaurs"]), ([7], ["aliens"]), ([6, 10], ["sharks"]), ([13, 4], []),
                  ([10], ["pirates"]), ([7, 2], ["robots"]), ([4], []), ([1, 17], ["magic"])):
        add(genre_ids=g, directors=[SPIELBERG], keywords=kw)
    # France co-productions led by another country.
    for main in ("united states", "united kingdom", "italy", "germany", "spain", "united states",
                 "canada", "japan", "united kingdom", "sweden"):
        extra = [c for c in rng.sample(COUNTRIES, 2) if c not in (main, "france")][:1]
        add(main_country=main, countries=[main, "france"] + extra)
    # French productions.
    for _ in range(10):
        add(main_country="france", countries=countries_for("france"))
    # Horror.
    for _ in range(18):
        add(genre_ids=sorted({3} | set(rng.sample(GENRES, rng.choice([0, 1])))))
    while len(movies) < COUNT:
        add()

    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w") as f:
        for m in movies:
            f.write(json.dumps(m, sort_keys=False) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "movies.jsonl")
