"""Synthetic parliamentary-style corpus for desk-scale experiments.

Real proceedings corpora are not bundled; this grammar produces sentences of
5 to 20 words over a closed vocabulary of a few hundred words, with enough
recurring phrasing that knowledge-base clustering has structure to find.
"""
from __future__ import annotations

import random

SPEAKERS = [
    "the commission", "the council", "the committee", "the rapporteur", "the presidency",
    "the parliament", "this house", "my group", "the minister", "the member states",
    "the european union", "the court of auditors", "the president", "our committee",
]
TOPICS = [
    "agriculture", "fisheries", "energy", "transport", "employment", "the environment",
    "human rights", "the budget", "public health", "education", "research", "trade",
    "security", "migration", "competition", "consumer protection", "the internal market",
    "regional policy", "food safety", "climate change", "development aid", "taxation",
    "social policy", "the single currency", "enlargement", "telecommunications",
]
NOUNS = [
    "report", "proposal", "directive", "regulation", "amendment", "resolution", "programme",
    "strategy", "agreement", "framework", "initiative", "debate", "decision", "position",
    "text", "measure", "policy", "plan", "procedure", "compromise",
]
ADJECTIVES = [
    "important", "clear", "necessary", "difficult", "excellent", "balanced", "ambitious",
    "urgent", "practical", "common", "new", "strong", "fair", "effective", "detailed",
]
VERBS = [
    "support", "welcome", "reject", "approve", "examine", "accept", "oppose", "adopt",
    "consider", "endorse", "discuss", "review",
]
ADVERBS = ["fully", "strongly", "clearly", "certainly", "simply", "also", "therefore", "now"]
COUNTRIES = [
    "france", "germany", "italy", "spain", "portugal", "greece", "ireland", "sweden",
    "finland", "denmark", "austria", "belgium", "poland", "hungary", "the netherlands",
    "the united kingdom", "turkey", "russia", "china", "africa",
]
GROUPS = [
    "farmers", "workers", "citizens", "consumers", "small businesses", "young people",
    "women", "pensioners", "fishermen", "students", "patients", "regions", "families",
]
TIMES = ["today", "this week", "next year", "in the future", "at the moment", "this morning", "last year"]
QUANT = ["many", "some", "all", "most", "several", "few"]

TEMPLATES = [
    "{speaker} must {verb} this {adj} {noun} on {topic} .",
    "i would like to thank {speaker} for this {adj} {noun} .",
    "we {adv} {verb} the {noun} on {topic} presented {time} .",
    "{speaker} has presented an {adj2} {noun} on {topic} .",
    "this {noun} is {adj} for {group} in {country} .",
    "we cannot {verb} a {noun} that ignores {group} .",
    "the situation in {country} is a matter of {topic} .",
    "{quant} {group} in {country} are concerned about {topic} .",
    "i believe that {topic} should be a priority for {speaker} .",
    "the {noun} on {topic} was adopted by {speaker} {time} .",
    "we need a {adj} {noun} to protect {group} .",
    "my group will {verb} the {noun} because it is {adj} .",
    "it is {adj} that {speaker} acts on {topic} {time} .",
    "madam president , {speaker} should {verb} the {noun} on {topic} .",
    "mr president , i {adv} {verb} the {adj} {noun} .",
    "the vote on {topic} will take place {time} .",
    "{speaker} and {speaker2} must work together on {topic} .",
    "we must not forget the {group} of {country} .",
    "this is an {adj2} question for {group} and for {topic} .",
    "i hope that {speaker} will {verb} our {noun} on {topic} .",
    "the debate is closed and the vote will take place {time} .",
    "{topic} and {topic2} are linked in this {noun} .",
    "we {verb} this {noun} .",
    "thank you , {speaker} .",
    "we {adv} {verb} the position of {speaker} on {topic} .",
    "{quant} of the amendments concern {topic} in {country} .",
    "the {noun} gives {group} a {adj} role in {topic} .",
]
_VOWEL_ADJ = ["important", "excellent", "ambitious", "urgent", "effective", "open", "interesting"]


def _fill(template: str, rng: random.Random) -> str:
    speaker, speaker2 = rng.sample(SPEAKERS, 2)
    topic, topic2 = rng.sample(TOPICS, 2)
    return template.format(
        speaker=speaker,
        speaker2=speaker2,
        topic=topic,
        topic2=topic2,
        noun=rng.choice(NOUNS),
        adj=rng.choice(ADJECTIVES),
        adj2=rng.choice(_VOWEL_ADJ),
        verb=rng.choice(VERBS),
        adv=rng.choice(ADVERBS),
        country=rng.choice(COUNTRIES),
        group=rng.choice(GROUPS),
        time=rng.choice(TIMES),
        quant=rng.choice(QUANT),
    )


def generate_desk_corpus(n_sentences: int = 2500, seed: int = 2024) -> list[str]:
    """Deterministic list of distinct synthetic sentences."""
    rng = random.Random(seed)
    seen: set[str] = set()
    out: list[str] = []
    while len(out) < n_sentences:
        s = _fill(rng.choice(TEMPLATES), rng)
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def write_desk_corpus(path, n_sentences: int = 2500, seed: int = 2024) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in generate_desk_corpus(n_sentences, seed):
            fh.write(s + "\n")
