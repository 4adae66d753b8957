#!/usr/bin/env python3
"""Regenerates tests/fixtures/lesson30 (synthetic 30 minute lesson for the mock backend)."""
import json
import pathlib
import sys

OUT = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/lesson30")
LESSON = "lesson30"
WIN = 120_000
N = 15

captions = [
    "The teacher stands at the front beside a board with a leaf diagram; students sit in rows taking notes.",
    "Students talk in pairs at their desks while the teacher walks between rows.",
    "The teacher points at slides on the projector about transpiration.",
    "Many hands are raised as the teacher calls on students.",
    "Students work in groups of four around desks pushed together, with a lamp at each table.",
    "Students sit alone with worksheets while the teacher circulates.",
    "A student presents a prediction at the front of the room.",
    "The teacher waits at the front; the class is quiet.",
    "The teacher writes measurements on the board as students call them out.",
    "Students in groups record data; two students at the back are chatting.",
    "The teacher introduces a new slide; several students rest their heads on desks.",
    "The teacher talks one-on-one with a student at a side table.",
    "A media cart stands near the left wall in front of the screen.",
    "Students work in groups to sketch an experiment plan on large paper.",
    "The teacher summarizes the lesson at the board; students pack up.",
]

# (opening teacher line, student reply, middle teacher line, question or None, closing teacher line)
script = [
    ("Good morning everyone. Let us make a quick transition to the warm-up at your tables.",
     "We have the leaf cards out.",
     "Today we look at how plants lose water through their leaves.",
     "Can you identify the parts of a leaf?",
     "Write the parts in your notebook."),
    ("Turn to your partner and discuss which leaf lost more water.",
     "The bigger leaf lost more, I think.",
     "Good, keep that idea in mind for later.",
     None,
     "Let us come back together now."),
    ("I rushed through the last slide, so some of that may be unclear.",
     "What does stomata mean again?",
     "Stomata are tiny openings on the underside of a leaf.",
     "Who can explain why leaves are green?",
     "Chlorophyll absorbs red and blue light."),
    ("I see hands going up eagerly around the room.",
     "The water goes out through the stomata.",
     "Exactly, and it leaves as vapour.",
     None,
     "Keep those hands ready for the next part."),
    ("We rearranged the desks so every group can see the light source.",
     "Our lamp is on now.",
     "Measure the mass of the plant every minute.",
     "How would you calculate the rate of water loss?",
     "Divide the change in mass by the time."),
    ("We are moving on to the second part of the lesson.",
     "Do we do this alone?",
     "Now please start the seatwork on page twelve.",
     None,
     "You have ten minutes for the worksheet."),
    ("That is a common misconception, so let us test it together.",
     "I thought plants only lose water at night.",
     "Let us check that against our data.",
     "How would you compare the two plants?",
     "Look at the slope of each line."),
    ("My last question went unanswered, so let me rephrase it.",
     "Is it about the lamp?",
     "Yes, think about what the lamp changes.",
     None,
     "Heat and light both matter here."),
    ("Read out your measurements one group at a time.",
     "Group two lost four grams.",
     "Thank you, I will add that to the table.",
     "How would you defend your prediction?",
     "Use the numbers when you answer."),
    ("A few students in the back are offtask right now.",
     "Sorry, we are back on it.",
     "Good, finish the last reading please.",
     None,
     "Record it in the shared table."),
    ("We are moving on to the final activity.",
     "Is this on the test?",
     "Several students look disengaged during this part.",
     None,
     "Sit up and look at the slide please."),
    ("I will come around and check each plan.",
     "Can we change the lamp distance?",
     "Yes, that is a good variable to change.",
     "Could you design an experiment to test the light effect?",
     "Write your plan in three steps."),
    ("The cart blocked the view of the screen for the left side.",
     "We can see it now.",
     "Thanks for moving over.",
     None,
     "Here is the summary of our data."),
    ("Share your plans with the group next to you.",
     "Ours changes the lamp height.",
     "That would give a clear comparison.",
     "What is photosynthesis?",
     "It is how plants make food from light."),
    ("Let us wrap up for today.",
     "Will we finish the plans tomorrow?",
     "Yes, bring your notebooks.",
     None,
     "Thank you all, see you tomorrow."),
]


def turn(speaker, start, end, text):
    return {"start_ms": start, "end_ms": end, "speaker": speaker, "text": text}


turns, questions, gold_acts, diar = [], [], [], []
for w, (t0, s0, t1, q, t2) in enumerate(script):
    b = w * WIN
    turns.append(turn("Teacher", b + 1000, b + 25000, t0))
    turns.append(turn("Student", b + 26000, b + 40000, s0))
    turns.append(turn("Teacher", b + 41000, b + 70000, t1))
    if q:
        turns.append(turn("Teacher", b + 72000, b + 80000, q))
        questions.append({"text": q, "start_ms": b + 72000, "end_ms": b + 80000})
    turns.append(turn("Teacher", b + 86000, b + 115000, t2))

for t in turns:
    if t["speaker"] == "Teacher":
        labels = ["TEACHER_QA"] if t["text"].endswith("?") else ["TEACHER_LECTURING"]
        gold_acts.append({"actor": "TEACHER", "start_ms": t["start_ms"], "end_ms": t["end_ms"], "labels": labels})
        if labels == ["TEACHER_LECTURING"]:
            gold_acts.append({"actor": "STUDENT", "start_ms": t["start_ms"], "end_ms": t["end_ms"],
                              "labels": ["STUDENT_LISTENING"]})
    else:
        gold_acts.append({"actor": "STUDENT", "start_ms": t["start_ms"], "end_ms": t["end_ms"], "labels": ["STUDENT_QA"]})
    # reference diarization boundaries drift half a second from the transcript
    diar.append({"speaker": t["speaker"].lower(), "start_ms": t["start_ms"] + 500, "end_ms": t["end_ms"] - 500})

for w in (4, 9, 13):
    gold_acts.append({"actor": "STUDENT", "start_ms": w * WIN, "end_ms": (w + 1) * WIN, "labels": ["STUDENT_GROUP_WORK"]})
gold_acts.append({"actor": "TEACHER", "start_ms": 11 * WIN, "end_ms": 12 * WIN, "labels": ["TEACHER_ONE_ON_ONE"]})

rules = {
    "hotspot_rules": [
        {"keyword": "offtask", "dimension_id": "2c", "polarity": "WEAKNESS"},
        {"keyword": "transition", "dimension_id": "2c", "polarity": "STRENGTH"},
        {"keyword": "rearranged", "dimension_id": "2e", "polarity": "STRENGTH"},
        {"keyword": "blocked", "dimension_id": "2e", "polarity": "WEAKNESS"},
        {"keyword": "rushed", "dimension_id": "3a", "polarity": "WEAKNESS"},
        {"keyword": "discuss", "dimension_id": "3b", "polarity": "STRENGTH"},
        {"keyword": "unanswered", "dimension_id": "3b", "polarity": "WEAKNESS"},
        {"keyword": "eagerly", "dimension_id": "3c", "polarity": "STRENGTH"},
        {"keyword": "disengaged", "dimension_id": "3c", "polarity": "WEAKNESS"},
        {"keyword": "misconception", "dimension_id": "3d", "polarity": "STRENGTH"},
        # planted fabrication: the quote below occurs nowhere in the lesson
        {"keyword": "seatwork", "dimension_id": "3c", "polarity": "WEAKNESS",
         "quote_override": "most students sat silently and ignored the worksheet for ten minutes"},
    ],
    "guidelines": {
        "3c": ["check whether students respond actively to the teacher's prompts",
               "check whether most students are intellectually involved in the task"],
    },
    "advice": {
        "2c": "Rehearse the routine for moving between activities and post the steps where students can see them",
        "3b": "Ask students to respond to each other before you respond, and wait at least three seconds after a question",
        "3c": "Give each student a role in the task and check in with the quietest tables first",
    },
    "activity_rules": [
        {"keyword": "board", "codes": ["TEACHER_WRITING"], "source": "any"},
        {"keyword": "groups", "codes": ["STUDENT_GROUP_WORK"], "source": "caption"},
        {"keyword": "presents", "codes": ["STUDENT_PRESENTING"], "source": "caption"},
        {"keyword": "one-on-one", "codes": ["TEACHER_ONE_ON_ONE"], "source": "caption"},
    ],
    "outline_shift_keywords": ["next topic", "moving on"],
}

clips = [
    ("clip-001", "Smooth transitions with a countdown", "A teacher uses a visible countdown so students move between stations quickly.", "2c;transitions;routines"),
    ("clip-002", "Student-run materials routine", "Table captains collect and return materials without teacher prompting.", "2c;materials;routines"),
    ("clip-003", "Arranging desks for group work", "Desks are arranged in pods so every student can see the demonstration.", "2e;space;groups"),
    ("clip-004", "Clear directions before a lab", "The teacher states the goal and models each step before students begin.", "3a;directions;explanations"),
    ("clip-005", "Think-pair-share discussion", "Students respond to each other and build on a partner's idea before sharing.", "3b;discussion;questioning"),
    ("clip-006", "Wait time after open questions", "The teacher waits several seconds after a question and invites many students to respond.", "3b;questioning;wait time"),
    ("clip-007", "Roles in cooperative tasks", "Each student in a group has a role so every student is involved in the task.", "3c;engagement;roles"),
    ("clip-008", "Checking in with quiet tables", "The teacher checks in with the quietest tables first and prompts each student.", "3c;engagement;monitoring"),
    ("clip-009", "Exit tickets to check understanding", "Short exit tickets show the teacher which students still hold a misconception.", "3d;assessment;feedback"),
    ("clip-010", "Specific feedback during practice", "The teacher gives specific, timely feedback to individual students during practice.", "3d;feedback;monitoring"),
    ("clip-011", "Posting routine steps", "Routine steps are posted on the wall so students can see them during the activity.", "2c;routines;procedures"),
    ("clip-012", "Lesson pacing with checkpoints", "The teacher paces the lesson with short checkpoints so explanations are not rushed.", "3a;pacing;explanations"),
]

plan = """Lesson plan: How plants lose water (grade 7 science, 30 minutes)

Goals: students can name the parts of a leaf, describe transpiration, and measure water loss.

1. Warm-up at tables with leaf cards (5 min).
2. Mini lecture on stomata and transpiration with slides (5 min).
3. Group measurement of plant mass under a lamp (10 min).
4. Individual worksheet on page twelve.
5. Groups design an experiment changing lamp distance, then share (10 min).
"""

OUT.mkdir(parents=True, exist_ok=True)
with open(OUT / "transcript.jsonl", "w") as f:
    for t in turns:
        f.write(json.dumps(t) + "\n")


def dump(name, doc):
    with open(OUT / name, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


dump("captions.json", {"captions": [
    {"lesson_id": LESSON, "start_ms": w * WIN, "end_ms": (w + 1) * WIN, "caption": c} for w, c in enumerate(captions)]})
dump("rules.json", rules)
dump("gold_questions.json", {"questions": questions})
dump("gold_activities.json", {"spans": gold_acts})
dump("gold_diarization.json", {"segments": diar})
with open(OUT / "clips.csv", "w") as f:
    f.write("clip_id,title,description,tags,uri\n")
    for cid, title, desc, tags in clips:
        f.write(f'{cid},{title},"{desc}",{tags},https://example.org/clips/{cid}.mp4\n')
(OUT / "lesson_plan.txt").write_text(plan)
