"""Writes tests/fixtures/dataset. Offsets in metadata.laq are computed here so
they always match the document text."""
import json
import os
import shutil

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "dataset")

LABELING = {
    "doc_1.txt": (
        "Consumer groups have pressed state legislatures for mandatory labels on foods made with genetically "
        "engineered ingredients. Shoppers have a right to information about their food, the groups argue. "
        "\"They deserve to know what they are eating,\" said the director of one advocacy coalition at a hearing "
        "in March. Labels would let families avoid ingredients they object to for religious or ethical reasons. "
        "Polls taken over the past decade show broad public support for labeling. Several countries in Europe "
        "and Asia already require such labels."
    ),
    "doc_2.txt": (
        "Food manufacturers oppose a patchwork of state labeling rules. Industry groups say separate labels for "
        "each state would raise grocery costs for every household. They also warn that a label would imply a "
        "safety risk that scientific bodies have not found. A national standard, the groups argue, would be "
        "simpler for companies and less confusing for shoppers. Some firms have started to disclose engineered "
        "ingredients voluntarily through scannable codes on the package."
    ),
    "doc_3.txt": (
        "Several national academies have reviewed hundreds of studies on engineered crops. Their reports "
        "concluded that approved genetically engineered crops are as safe to eat as conventional crops. The "
        "reviews found no pattern of harm to human health. Researchers noted that long-term ecological effects, "
        "such as herbicide-resistant weeds, still deserve monitoring. The academies did not take a position on "
        "labeling itself, calling it a question of policy rather than science."
    ),
}

LABELING_OUTPUT = (
    "Consumer groups argue that shoppers have a right to information about their food. They deserve to know "
    "what they are eating, and labels would let families avoid ingredients they object to. Food manufacturers "
    "say separate labels would raise grocery costs, and they warn that a label would imply a safety risk. "
    "National academies concluded that approved genetically engineered crops are as safe to eat as "
    "conventional crops."
)

LABELING_REFERENCE = (
    "Advocates say shoppers have a right to know what they are eating and want mandatory labels. "
    "Manufacturers warn that state labels would raise costs and suggest a risk that scientists have not found. "
    "Scientific reviews found approved engineered crops as safe as conventional ones."
)

SMOKE = {
    "doc_1.txt": (
        "Wildfire smoke contains fine particles that can travel hundreds of miles from the fire. The particles "
        "are small enough to lodge deep in the lungs and enter the bloodstream. Health officials advise people "
        "to stay indoors and keep windows closed when the air quality index is high. Children, older adults and "
        "people with asthma face the greatest risk from smoke exposure."
    ),
    "doc_2.txt": (
        "Portable air cleaners with HEPA filters can cut indoor particle levels by more than half. A simple box "
        "fan fitted with a furnace filter offers a cheaper alternative. Cloth masks do little to block fine "
        "particles, while well-fitted N95 respirators filter most of them. Experts recommend setting up one "
        "clean room in the home during smoke events."
    ),
    "doc_3.txt": (
        "Fire seasons in the western United States have grown longer over the past four decades. Warmer "
        "temperatures dry out vegetation earlier in the year. Land managers use prescribed burns to reduce the "
        "fuel that feeds large fires."
    ),
}

SMOKE_ALCE_REPLY = (
    "Wildfire smoke contains fine particles that can travel hundreds of miles and lodge deep in the lungs [1]. "
    "Health officials advise people to stay indoors and keep windows closed when the air quality index is high "
    "[1]. Portable air cleaners with HEPA filters can cut indoor particle levels by more than half, and a box "
    "fan fitted with a furnace filter offers a cheaper alternative [2]. Well-fitted N95 respirators filter most "
    "fine particles, while cloth masks do little [2]. Fire seasons in the western United States have grown "
    "longer as warmer temperatures dry out vegetation [3]."
)

SMOKE_REFERENCE = (
    "Smoke particles from wildfires travel far and reach deep into the lungs, so officials advise staying "
    "indoors. HEPA air cleaners or a box fan with a furnace filter reduce indoor particles, and N95 respirators "
    "work better than cloth masks. Fire seasons have grown longer in the West."
)

ESCAPE = {
    "doc_1.txt": (
        "A prisoner who escaped from a county jail on Sunday was captured two days later in a motel outside the "
        "city. Deputies said the man climbed through a ceiling vent in a shower area and reached the roof. His "
        "previous escape occurred in 2005, when he slipped away from a work crew. The sheriff ordered a review "
        "of the jail's ventilation system."
    ),
    "doc_2.txt": (
        "A technical glitch disabled several security cameras at the jail for about six hours on Sunday. "
        "Officials said the outage was caused by a failed software update. The escape was discovered during a "
        "routine headcount that evening. The county has since hired an outside firm to audit the camera network."
    ),
}

# (sentence, [(doc_id, exact source substring), ...]) for the attribute-first output.
ESCAPE_PLAN = [
    ("A prisoner who escaped from a county jail on Sunday was captured two days later in a motel.",
     [("doc_1.txt", "A prisoner who escaped from a county jail on Sunday was captured two days later in a motel outside the city.")]),
    ("He climbed through a ceiling vent in a shower area and reached the roof, while a technical glitch disabled several security cameras.",
     [("doc_1.txt", "Deputies said the man climbed through a ceiling vent in a shower area and reached the roof."),
      ("doc_2.txt", "A technical glitch disabled several security cameras at the jail for about six hours on Sunday.")]),
    ("His previous escape occurred in 2005.",
     [("doc_1.txt", "His previous escape occurred in 2005, when he slipped away from a work crew.")]),
    ("The escape was discovered during a routine headcount that evening.",
     [("doc_2.txt", "The escape was discovered during a routine headcount that evening.")]),
]


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def bundle(name, docs, question=None, method=None, output=None, metadata=None, reference=None):
    d = os.path.join(OUT, name)
    for doc_id, text in docs.items():
        write(os.path.join(d, "docs", doc_id), text)
    if question:
        write(os.path.join(d, "question.txt"), question + "\n")
    if method:
        write(os.path.join(d, "method.txt"), method + "\n")
    if output is not None:
        write(os.path.join(d, "output.txt"), output)
    if metadata is not None:
        write(os.path.join(d, "metadata.laq"), metadata)
    if reference:
        write(os.path.join(d, "reference.txt"), reference + "\n")


def main():
    shutil.rmtree(OUT, ignore_errors=True)
    bundle("a_labeling_vanilla", LABELING, question="Should foods made with genetically engineered ingredients be labeled?",
           method="vanilla", reference=LABELING_REFERENCE)
    bundle("b_smoke_alce", SMOKE, question="How can people protect themselves from wildfire smoke?",
           method="alce", reference=SMOKE_REFERENCE)

    output = " ".join(s for s, _ in ESCAPE_PLAN)
    records = []
    for idx, (_, sources) in enumerate(ESCAPE_PLAN):
        by_doc = {}
        for doc_id, sub in sources:
            start = ESCAPE[doc_id].index(sub)
            by_doc.setdefault(doc_id, []).append((start, start + len(sub)))
        for doc_id, spans in by_doc.items():
            spans = ", ".join(f"[{s}, {e}]" for s, e in spans)
            records.append(f"<{idx}, {doc_id}, [{spans}]>")
    bundle("c_escape_attrfirst", ESCAPE, method="attrfirst", output=output, metadata="\n".join(records) + "\n")

    script = {
        "chat": {
            "rules": [
                {"task": "generate", "method": "vanilla", "when": "genetically engineered", "replies": [LABELING_OUTPUT]},
                {"task": "generate", "method": "alce", "when": "Wildfire smoke", "replies": [SMOKE_ALCE_REPLY]},
                {"task": "decompose",
                 "replies": [{"split_clauses": {"after": "Sentence:\n", "before": "\n\nList one fact"}}]},
                {"task": "decontextualize",
                 "replies": [{"echo": {"after": "(gaps are marked with \"...\"):\n", "before": "\n\nStandalone sentence:",
                                       "replace": {" ... ": " "}}}]},
                {"task": "attribution", "replies": [{"best_source": {"max_spans": 2}}]},
            ]
        },
        "nli": {"default": "lexical", "threshold": 0.75},
    }
    write(os.path.join(HERE, "mock_script.json"), json.dumps(script, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
