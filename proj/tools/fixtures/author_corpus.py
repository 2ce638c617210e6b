#!/usr/bin/env python3
"""Author the seed corpus fixtures.

Writes tests/fixtures/corpus/{schemas,samples}.jsonl (24 trackers x 21 samples)
and tests/fixtures/desk/{schemas,samples}.jsonl (3 x 7). Output is
deterministic; rerun after editing the generators below.
"""

import argparse
import datetime as dt
import json
import random
from pathlib import Path

NUM_WORDS = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
             "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
             "sixteen", "seventeen", "eighteen", "nineteen", "twenty"]
BASE_DAY = dt.date(2022, 3, 1)


def say(n, rng):
    if isinstance(n, int) and n <= 20 and rng.random() < 0.4:
        return NUM_WORDS[n]
    return str(n)


def clock(h, m):
    suffix = "am" if h < 12 else "pm"
    hh = h % 12 or 12
    return f"{hh}:{m:02d} {suffix}" if m else f"{hh} {suffix}"


def month_day(day):
    return day.strftime("%B ") + str(day.day)


def tp(day, h, m):
    return f"{day.isoformat()}T{h:02d}:{m:02d}"


def f(name, kind, description, **extra):
    out = {"name": name, "kind": kind, "description": description}
    out.update(extra)
    return out


def choice(name, options, description, multi=False):
    return f(name, "multi_choice" if multi else "single_choice", description, options=options)


def likert(name, lo, hi, description):
    return f(name, "likert", description, min=lo, max=hi)


IN_SITU = f("Time", "time_point", "the time of the entry")
DAILY = f("Date", "date", "the day the summary is about")


class Tracker:
    def __init__(self, tracker_id, name, fields, daily, gen, utc_offset=0, time_field=None):
        self.time_field = time_field or (DAILY if daily else IN_SITU)
        self.tracker_id = tracker_id
        self.name = name
        self.fields = fields
        self.daily = daily
        self.gen = gen
        self.utc_offset = utc_offset

    def schema(self):
        s = {"tracker_id": self.tracker_id, "name": self.name, "fields": self.fields,
             "time_field": self.time_field}
        if self.utc_offset:
            s["utc_offset_minutes"] = self.utc_offset
        return s


def pick(rng, xs):
    return rng.choice(xs)


def some(rng, xs, k):
    """k distinct elements kept in the order of xs."""
    return sorted(rng.sample(xs, k), key=xs.index)


def stamp(rng, day, daily):
    """Optionally mention the time or date; returns (suffix, values)."""
    if rng.random() >= 0.3:
        return "", {}
    if daily:
        return f" on {month_day(day)}", {"Date": day.isoformat()}
    h, m = rng.choice([7, 8, 12, 13, 17, 18, 19, 20, 21]), rng.choice([0, 15, 30, 45])
    return f" at {clock(h, m)} on {month_day(day)}", {"Time": tp(day, h, m)}


def join_words(items):
    return items[0] if len(items) == 1 else ", ".join(items[:-1]) + " and " + items[-1]


# ----------------------------------------------------------------------------
# generators: (rng, day) -> (phrase, values)

EXERCISES = ["push-ups", "sit-ups", "squats", "lunges", "pull-ups", "burpees", "crunches",
             "jumping jacks", "planks", "laps of swimming", "bicep curls", "dips"]


def gen_exercise(rng, day):
    ex = pick(rng, EXERCISES)
    reps = rng.choice([3, 5, 8, 10, 12, 15, 20, 25, 30, 40])
    inten = pick(rng, ["light", "moderate", "vigorous"])
    when, v = stamp(rng, day, False)
    form = rng.randrange(4)
    if form == 0:
        phrase = f"I did {say(reps, rng)} {ex} at {inten} intensity{when}"
        v.update({"Exercise": ex, "Repetitions": reps, "Intensity": inten})
    elif form == 1:
        phrase = f"{say(reps, rng)} reps of {ex}, pretty {inten}{when}"
        v.update({"Exercise": ex, "Repetitions": reps, "Intensity": inten})
    elif form == 2:
        phrase = f"just finished {say(reps, rng)} {ex}{when}"
        v.update({"Exercise": ex, "Repetitions": reps})
    else:
        phrase = f"a {inten} set of {ex}{when}"
        v.update({"Exercise": ex, "Intensity": inten})
    return phrase, v


ROUTES = ["the river path", "the park loop", "the beach", "the old railway trail", "the hills",
          "the track at school", "my neighborhood", "the forest trail"]


def gen_running(rng, day):
    km = rng.choice([3, 4, 5, 6, 7.5, 8, 10, 12, 15, 21.1])
    mins = int(km * rng.choice([5, 5.5, 6, 6.5, 7]))
    route = pick(rng, ROUTES)
    effort = rng.randint(1, 5)
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"ran {km} km along {route} in {mins} minutes{when}"
        v.update({"Distance": km, "Duration": mins, "Route": route})
    elif form == 1:
        phrase = f"{km}k run on {route}, effort {effort} out of 5{when}"
        v.update({"Distance": km, "Route": route, "Effort": effort})
    else:
        phrase = f"went for a {mins} minute run, felt like a {effort} of 5{when}"
        v.update({"Duration": mins, "Effort": effort})
    return phrase, v


def gen_steps(rng, day):
    steps = rng.randrange(3000, 16000, 250)
    active = rng.choice([20, 30, 45, 60, 75, 90])
    acts = some(rng, ["walking", "cycling", "stairs", "running"], rng.randint(1, 2))
    when, v = stamp(rng, day, True)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"{steps} steps today{when}, mostly {join_words(acts)}"
        v.update({"Steps": steps, "Activities": ", ".join(acts)})
    elif form == 1:
        phrase = f"walked {steps} steps and was active for {active} minutes{when}"
        v.update({"Steps": steps, "Active minutes": active})
    else:
        phrase = f"about {active} active minutes of {join_words(acts)}{when}"
        v.update({"Active minutes": active, "Activities": ", ".join(acts)})
    return phrase, v


DREAMS = ["I dreamt I was late for an exam and could not find the room",
          "a strange dream about flying over my hometown",
          "dreamt about my grandmother's kitchen and the smell of bread",
          "a dream where the office was flooded",
          "I was lost in a huge train station all night",
          "a calm dream about walking on a beach"]


def gen_sleep(rng, day):
    start_h, start_m = rng.choice([21, 22, 23]), rng.choice([0, 15, 30, 45])
    hours = rng.choice([6, 7, 8, 9])
    end = dt.datetime.combine(day, dt.time(start_h, start_m)) + dt.timedelta(hours=hours, minutes=rng.choice([0, 30]))
    quality = rng.randint(1, 5)
    wake = rng.randint(0, 4)
    dream = pick(rng, DREAMS)
    when, v = "", {}
    rng_txt = f"{tp(day, start_h, start_m)} to {end.strftime('%Y-%m-%dT%H:%M')}"
    form = rng.randrange(4)
    if form == 0:
        phrase = (f"slept from {clock(start_h, start_m)} to {clock(end.hour, end.minute)} on {month_day(day)}, "
                  f"quality {quality} of 5")
        v = {"Sleep": rng_txt, "Quality": quality}
    elif form == 1:
        phrase = f"woke up {say(wake, rng)} times during the night{when}, sleep quality {quality}"
        v.update({"Awakenings": wake, "Quality": quality})
    elif form == 2:
        phrase = f"rough night{when}, woke up {say(wake, rng)} times and {dream}"
        v.update({"Awakenings": wake, "Dreams": dream})
    else:
        phrase = f"slept well{when}, {dream}"
        v.update({"Quality": rng.choice([4, 5]), "Dreams": dream})
    return phrase, v


def gen_nap(rng, day):
    mins = rng.choice([10, 15, 20, 25, 30, 45, 60, 90])
    refreshed = pick(rng, ["yes", "somewhat", "no"])
    feel = {"yes": "felt refreshed", "somewhat": "felt somewhat rested", "no": "did not feel refreshed"}[refreshed]
    when, v = stamp(rng, day, False)
    form = rng.randrange(2)
    if form == 0:
        phrase = f"took a {mins} minute nap{when} and {feel}"
        v.update({"Duration": mins, "Refreshed": refreshed})
    else:
        phrase = f"napped for {say(mins, rng)} minutes{when}"
        v.update({"Duration": mins})
    return phrase, v


FOODS = ["oatmeal with berries", "a turkey sandwich", "pasta carbonara", "a caesar salad", "sushi",
         "an apple", "chicken curry with rice", "scrambled eggs", "a bowl of ramen", "yogurt with granola",
         "a veggie burger", "tomato soup"]


def gen_meal(rng, day):
    meal = pick(rng, ["breakfast", "lunch", "dinner", "snack"])
    food = pick(rng, FOODS)
    portion = pick(rng, ["small", "medium", "large"])
    hunger = rng.randint(1, 5)
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"had {food} for {meal}{when}, a {portion} portion"
        v.update({"Meal": meal, "Food": food, "Portion": portion})
    elif form == 1:
        phrase = f"{meal}: {food}, hunger was {hunger} out of 5{when}"
        v.update({"Meal": meal, "Food": food, "Hunger": hunger})
    else:
        phrase = f"ate {food}{when}"
        v.update({"Food": food})
    return phrase, v


SWEETS = ["chocolate", "cake", "candy", "ice cream", "cookies"]
DIET_NOTES = ["ate too late in the evening and felt heavy afterwards",
              "cooked everything at home today which felt good",
              "skipped breakfast because of an early meeting",
              "lots of snacking while working from home",
              "tried a new lentil recipe that I want to repeat"]


def gen_daily_diet(rng, day):
    fruit, veg = rng.randint(0, 5), rng.randint(0, 6)
    sweets = some(rng, SWEETS, rng.randint(1, 2))
    note = pick(rng, DIET_NOTES)
    when, v = stamp(rng, day, True)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"{say(fruit, rng)} servings of fruit and {say(veg, rng)} of vegetables{when}"
        v.update({"Fruit servings": fruit, "Vegetable servings": veg})
    elif form == 1:
        phrase = f"had some {join_words(sweets)} today{when}, {note}"
        v.update({"Sweets": ", ".join(sweets), "Notes": note})
    else:
        phrase = f"{say(veg, rng)} vegetable servings and {join_words(sweets)}{when}"
        v.update({"Vegetable servings": veg, "Sweets": ", ".join(sweets)})
    return phrase, v


def gen_water(rng, day):
    n = rng.randint(1, 4)
    drink = pick(rng, ["water", "tea", "juice", "sparkling water"])
    when, v = stamp(rng, day, False)
    form = rng.randrange(2)
    if form == 0:
        phrase = f"drank {say(n, rng)} glasses of {drink}{when}"
        v.update({"Glasses": n, "Drink": drink})
    else:
        phrase = f"{say(n, rng)} more glasses{when}"
        v.update({"Glasses": n})
    return phrase, v


EMOTIONS = ["happy", "calm", "anxious", "sad", "angry", "tired", "excited"]
TRIGGERS = ["a long meeting", "a call with my sister", "the traffic", "good news at work", "a bad night",
            "the sunny weather", "an argument with a friend", "finishing my project"]


def gen_mood(rng, day):
    mood = rng.randint(1, 7)
    emo = some(rng, EMOTIONS, rng.randint(1, 2))
    trig = pick(rng, TRIGGERS)
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"feeling {join_words(emo)} after {trig}{when}"
        v.update({"Emotions": ", ".join(emo), "Trigger": trig})
    elif form == 1:
        phrase = f"mood {mood} out of 7, {join_words(emo)}{when}"
        v.update({"Mood": mood, "Emotions": ", ".join(emo)})
    else:
        phrase = f"{trig} put my mood at a {mood}{when}"
        v.update({"Mood": mood, "Trigger": trig})
    return phrase, v


HIGHLIGHTS = ["had a long lunch with an old friend and laughed a lot",
              "finally fixed the bug that blocked the release for a week",
              "walked home through the park while the sun was setting",
              "my daughter read her first book out loud to me",
              "got positive feedback on my presentation from the whole team"]
GRATITUDE = ["my family", "good coffee", "a quiet morning", "my health", "helpful colleagues", "sunshine"]


def gen_journal(rng, day):
    hl = pick(rng, HIGHLIGHTS)
    grat = pick(rng, GRATITUDE)
    stress = rng.randint(1, 5)
    when, v = stamp(rng, day, True)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"best part of the day{when}: {hl}"
        v.update({"Highlight": hl})
    elif form == 1:
        phrase = f"grateful for {grat}{when}, stress level {stress}"
        v.update({"Gratitude": grat, "Stress": stress})
    else:
        phrase = f"stress {stress} of 5 but {hl}{when}"
        v.update({"Stress": stress, "Highlight": hl})
    return phrase, v


MEDS = [("ibuprofen", [200, 400, 600]), ("paracetamol", [500, 1000]), ("vitamin d", [25, 50]),
        ("metformin", [500, 850]), ("cetirizine", [10]), ("magnesium", [250, 400])]


def gen_medication(rng, day):
    med, doses = pick(rng, MEDS)
    dose = pick(rng, doses)
    food = pick(rng, ["yes", "no"])
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"took {dose} mg of {med} {'with' if food == 'yes' else 'without'} food{when}"
        v.update({"Medication": med, "Dose": dose, "Taken with food": food})
    elif form == 1:
        phrase = f"{med} {dose}mg{when}"
        v.update({"Medication": med, "Dose": dose})
    else:
        phrase = f"had my {med} {'after breakfast' if food == 'yes' else 'on an empty stomach'}{when}"
        v.update({"Medication": med, "Taken with food": food})
    return phrase, v


def gen_headache(rng, day):
    sev = rng.randint(1, 10)
    loc = pick(rng, ["forehead", "temples", "back of head", "one side"])
    relief = pick(rng, ["a dark room", "ibuprofen", "a nap", "cold compress", "drinking water", "nothing helped"])
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"headache in my {loc}, about {sev} out of 10{when}"
        v.update({"Location": loc, "Severity": sev})
    elif form == 1:
        phrase = f"{sev}/10 headache{when}, {relief} helped" if relief != "nothing helped" else \
            f"{sev}/10 headache{when} and nothing helped"
        v.update({"Severity": sev, "Relief": relief})
    else:
        phrase = f"pain around the {loc}{when}, tried {relief}" if relief != "nothing helped" else \
            f"pain around the {loc}{when}, nothing helped"
        v.update({"Location": loc, "Relief": relief})
    return phrase, v


SYMPTOMS = ["cough", "fever", "sore throat", "runny nose", "fatigue", "nausea"]
SYMPTOM_NOTES = ["stayed in bed most of the afternoon",
                 "felt better after a hot shower in the evening",
                 "the cough got worse at night",
                 "called the doctor who said to rest and drink fluids"]


def gen_symptoms(rng, day):
    sym = some(rng, SYMPTOMS, rng.randint(1, 3))
    temp = rng.choice([36.8, 37.2, 37.5, 37.9, 38.2, 38.6, 39.1])
    note = pick(rng, SYMPTOM_NOTES)
    when, v = stamp(rng, day, True)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"{join_words(sym)} today{when}, temperature {temp}"
        v.update({"Symptoms": ", ".join(sym), "Temperature": temp})
    elif form == 1:
        phrase = f"still have {join_words(sym)}{when}, {note}"
        v.update({"Symptoms": ", ".join(sym), "Notes": note})
    else:
        phrase = f"temperature was {temp} degrees{when}"
        v.update({"Temperature": temp})
    return phrase, v


TASKS = ["writing the quarterly report", "code review", "answering emails", "preparing slides",
         "debugging the payment service", "planning the sprint", "reading research papers"]


def gen_work_session(rng, day):
    task = pick(rng, TASKS)
    focus = rng.randint(1, 5)
    intr = rng.randint(0, 6)
    h, m = rng.choice([8, 9, 10, 13, 14, 15, 16]), rng.choice([0, 30])
    length = rng.choice([30, 45, 60, 90, 120])
    end = dt.datetime.combine(day, dt.time(h, m)) + dt.timedelta(minutes=length)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"worked on {task} from {clock(h, m)} to {clock(end.hour, end.minute)} on {month_day(day)}"
        v = {"Task": task, "Session": f"{tp(day, h, m)} to {end.strftime('%Y-%m-%dT%H:%M')}"}
    elif form == 1:
        when, v = "", {}
        phrase = f"{task}, focus {focus} of 5, {say(intr, rng)} interruptions{when}"
        v.update({"Task": task, "Focus": focus, "Interruptions": intr})
    else:
        when, v = "", {}
        phrase = f"got interrupted {say(intr, rng)} times while {task}{when}"
        v.update({"Task": task, "Interruptions": intr})
    return phrase, v


ACCOMPLISHMENTS = ["shipped the new onboarding flow to all users",
                   "closed out every ticket from last week's backlog",
                   "finished the first draft of the grant proposal",
                   "interviewed two candidates and wrote up the feedback",
                   "migrated the database without any downtime"]


def gen_daily_work(rng, day):
    hours = rng.choice([4, 5, 6, 7, 7.5, 8, 9, 10])
    meetings = rng.randint(0, 7)
    acc = pick(rng, ACCOMPLISHMENTS)
    when, v = stamp(rng, day, True)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"worked {hours} hours with {say(meetings, rng)} meetings{when}"
        v.update({"Hours worked": hours, "Meetings": meetings})
    elif form == 1:
        phrase = f"{hours} hour day{when}, {acc}"
        v.update({"Hours worked": hours, "Accomplishment": acc})
    else:
        phrase = f"{say(meetings, rng)} meetings today but still {acc}{when}"
        v.update({"Meetings": meetings, "Accomplishment": acc})
    return phrase, v


PEOPLE = ["Anna", "my brother", "Tom", "my neighbor", "Priya", "my old roommate", "Luis", "my parents"]
SOCIAL_ACTS = ["coffee", "meal", "call", "walk", "party", "game"]


def gen_social(rng, day):
    who = pick(rng, PEOPLE)
    act = pick(rng, SOCIAL_ACTS)
    enjoy = rng.randint(1, 5)
    verb = {"coffee": "grabbed coffee with", "meal": "had a meal with", "call": "had a call with",
            "walk": "went for a walk with", "party": "went to a party with", "game": "played a game with"}[act]
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"{verb} {who}{when}"
        v.update({"Person": who, "Activity": act})
    elif form == 1:
        phrase = f"{verb} {who}, enjoyed it {enjoy} out of 5{when}"
        v.update({"Person": who, "Activity": act, "Enjoyment": enjoy})
    else:
        phrase = f"saw {who}{when}, it was a {enjoy} of 5"
        v.update({"Person": who, "Enjoyment": enjoy})
    return phrase, v


CONTACTS = ["in person", "phone", "video", "message"]
REFLECTIONS = ["felt a bit lonely in the evening even after talking to people",
               "it was nice to catch up with friends I had not seen in months",
               "too many conversations today and I needed quiet time afterwards",
               "reconnected with a cousin and we made plans for the summer"]


def gen_daily_social(rng, day):
    n = rng.randint(0, 9)
    kinds = some(rng, CONTACTS, rng.randint(1, 2))
    refl = pick(rng, REFLECTIONS)
    when, v = stamp(rng, day, True)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"met {say(n, rng)} people today{when}, mostly {join_words(kinds)}"
        v.update({"People met": n, "Contact types": ", ".join(kinds)})
    elif form == 1:
        phrase = f"talked to {say(n, rng)} people{when}; {refl}"
        v.update({"People met": n, "Reflection": refl})
    else:
        phrase = f"only {join_words(kinds)} contact{when}"
        v.update({"Contact types": ", ".join(kinds)})
    return phrase, v


STORES = [("groceries", ["the supermarket", "the farmers market"]), ("transport", ["the gas station", "the metro"]),
          ("dining", ["the thai place", "a pizza shop"]), ("entertainment", ["the cinema", "the bookstore"]),
          ("household", ["the hardware store", "ikea"]), ("health", ["the pharmacy", "the dentist"])]


def gen_expense(rng, day):
    cat, stores = pick(rng, STORES)
    store = pick(rng, stores)
    amount = rng.choice([4.5, 8, 12.99, 15, 23.4, 37, 49.95, 60, 85, 120])
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"spent {amount} dollars at {store}{when}"
        v.update({"Amount": amount, "Store": store})
    elif form == 1:
        phrase = f"{amount} on {cat} at {store}{when}"
        v.update({"Amount": amount, "Category": cat, "Store": store})
    else:
        phrase = f"paid {amount} for {cat}{when}"
        v.update({"Amount": amount, "Category": cat})
    return phrase, v


def gen_daily_budget(rng, day):
    total = rng.choice([0, 12, 25.5, 40, 64.2, 90, 135, 210])
    impulse = rng.randint(0, 3)
    sat = pick(rng, ["yes", "no"])
    when, v = stamp(rng, day, True)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"spent {total} in total{when} with {say(impulse, rng)} impulse buys"
        v.update({"Total spent": total, "Impulse purchases": impulse})
    elif form == 1:
        phrase = f"{total} spent today{when}, {'happy' if sat == 'yes' else 'not happy'} with that"
        v.update({"Total spent": total, "Satisfied": sat})
    else:
        phrase = f"{say(impulse, rng)} impulse purchases{when}, {'no regrets' if sat == 'yes' else 'regret it'}"
        v.update({"Impulse purchases": impulse, "Satisfied": sat})
    return phrase, v


def gen_coffee(rng, day):
    cups = rng.randint(1, 3)
    kind = pick(rng, ["espresso", "latte", "filter coffee", "cappuccino", "americano"])
    sugar = pick(rng, ["yes", "no"])
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"{say(cups, rng)} {kind}{'s' if cups > 1 else ''}{when}"
        v.update({"Cups": cups, "Type": kind})
    elif form == 1:
        phrase = f"a {kind} {'with' if sugar == 'yes' else 'without'} sugar{when}"
        v.update({"Cups": 1, "Type": kind, "Sugar": sugar})
    else:
        phrase = f"had {say(cups, rng)} cups of coffee{when}"
        v.update({"Cups": cups})
    return phrase, v


OCCASIONS = ["dinner with friends", "a work event", "watching the game", "a birthday", "a quiet night in"]


def gen_alcohol(rng, day):
    n = rng.randint(1, 5)
    bev = pick(rng, ["beer", "wine", "cocktail", "spirits"])
    occ = pick(rng, OCCASIONS)
    noun = {"beer": "beers", "wine": "glasses of wine", "cocktail": "cocktails", "spirits": "shots"}[bev]
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"{say(n, rng)} {noun} at {occ}{when}"
        v.update({"Drinks": n, "Beverage": bev, "Occasion": occ})
    elif form == 1:
        phrase = f"had {say(n, rng)} {noun}{when}"
        v.update({"Drinks": n, "Beverage": bev})
    else:
        phrase = f"a few drinks during {occ}{when}"
        v.update({"Occasion": occ})
    return phrase, v


BOOKS = ["Dune", "Pride and Prejudice", "The Hobbit", "Sapiens", "Educated", "Project Hail Mary", "Middlemarch"]
THOUGHTS = ["the pacing slowed down but the characters kept me going",
            "beautiful writing and I underlined half the chapter",
            "the argument felt thin and repetitive in this part",
            "could not put it down and stayed up far too late"]


def gen_reading(rng, day):
    book = pick(rng, BOOKS)
    pages = rng.choice([10, 15, 20, 25, 30, 40, 50, 75])
    enjoy = rng.randint(1, 5)
    thought = pick(rng, THOUGHTS)
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"read {pages} pages of {book}{when}"
        v.update({"Book": book, "Pages": pages})
    elif form == 1:
        phrase = f"{book}: {thought}{when}"
        v.update({"Book": book, "Thoughts": thought})
    else:
        phrase = f"{pages} pages tonight{when}, enjoyment {enjoy} of 5"
        v.update({"Pages": pages, "Enjoyment": enjoy})
    return phrase, v


PIECES = ["scales", "a Bach minuet", "Wonderwall", "the Moonlight sonata", "blues licks", "a new etude"]


def gen_practice(rng, day):
    inst = pick(rng, ["piano", "guitar", "violin", "drums", "singing"])
    mins = rng.choice([15, 20, 30, 45, 60, 90])
    piece = pick(rng, PIECES)
    verb = "practiced singing" if inst == "singing" else f"practiced {inst}"
    when, v = stamp(rng, day, False)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"{verb} for {mins} minutes{when}"
        v.update({"Instrument": inst, "Duration": mins})
    elif form == 1:
        phrase = f"{verb}, worked on {piece}{when}"
        v.update({"Instrument": inst, "Pieces": piece})
    else:
        phrase = f"{mins} minutes on {piece}{when}"
        v.update({"Duration": mins, "Pieces": piece})
    return phrase, v


LANG_ACTS = ["flashcards", "reading", "listening", "speaking", "writing"]


def gen_language(rng, day):
    lang = pick(rng, ["spanish", "french", "german", "japanese", "korean"])
    mins = rng.choice([10, 15, 20, 30, 45, 60])
    acts = some(rng, LANG_ACTS, rng.randint(1, 2))
    words = rng.randint(3, 25)
    when, v = stamp(rng, day, True)
    form = rng.randrange(3)
    if form == 0:
        phrase = f"{mins} minutes of {lang.capitalize()}{when}, did {join_words(acts)}"
        v.update({"Language": lang, "Minutes": mins, "Activities": ", ".join(acts)})
    elif form == 1:
        phrase = f"learned {say(words, rng)} new {lang.capitalize()} words{when}"
        v.update({"Language": lang, "New words": words})
    else:
        phrase = f"studied for {mins} minutes with {join_words(acts)}{when}"
        v.update({"Minutes": mins, "Activities": ", ".join(acts)})
    return phrase, v


TRACKERS = [
    # physical activity
    Tracker("exercise", "Exercise", [
        f("Exercise", "short_text", "the name of the exercise"),
        f("Repetitions", "number", "the number of repetitions or laps of the exercise"),
        choice("Intensity", ["light", "moderate", "vigorous"], "the intensity of the exercise"),
    ], False, gen_exercise),
    Tracker("running", "Running", [
        f("Distance", "number", "the distance run in kilometers"),
        f("Duration", "number", "the duration of the run in minutes"),
        f("Route", "short_text", "the route of the run"),
        likert("Effort", 1, 5, "how hard the run felt"),
    ], False, gen_running),
    Tracker("daily-steps", "Daily Steps", [
        f("Steps", "number", "the number of steps walked"),
        f("Active minutes", "number", "the number of active minutes"),
        choice("Activities", ["walking", "cycling", "stairs", "running"], "the activities done", multi=True),
    ], True, gen_steps),
    # sleep
    Tracker("sleep-log", "Sleep Log", [
        likert("Quality", 1, 5, "the quality of the sleep"),
        f("Awakenings", "number", "the number of times the user woke up"),
        f("Dreams", "long_text", "the dreams the user remembers"),
    ], True, gen_sleep, time_field=f("Sleep", "time_range", "when the sleep started and ended")),
    Tracker("nap", "Nap", [
        f("Duration", "number", "the length of the nap in minutes"),
        choice("Refreshed", ["yes", "somewhat", "no"], "whether the nap was refreshing"),
    ], False, gen_nap),
    # diet
    Tracker("meal", "Meal", [
        choice("Meal", ["breakfast", "lunch", "dinner", "snack"], "the type of meal"),
        f("Food", "short_text", "the food eaten"),
        choice("Portion", ["small", "medium", "large"], "the portion size"),
        likert("Hunger", 1, 5, "how hungry the user was"),
    ], False, gen_meal),
    Tracker("daily-diet", "Daily Diet", [
        f("Fruit servings", "number", "the number of fruit servings"),
        f("Vegetable servings", "number", "the number of vegetable servings"),
        choice("Sweets", SWEETS, "the sweets eaten", multi=True),
        f("Notes", "long_text", "notes about the diet of the day"),
    ], True, gen_daily_diet),
    Tracker("water", "Water Intake", [
        f("Glasses", "number", "the number of glasses drunk"),
        choice("Drink", ["water", "tea", "juice", "sparkling water"], "the drink"),
    ], False, gen_water),
    # mood and mental health
    Tracker("mood", "Mood", [
        likert("Mood", 1, 7, "the mood rating"),
        choice("Emotions", EMOTIONS, "the emotions felt", multi=True),
        f("Trigger", "short_text", "what caused the mood"),
    ], False, gen_mood),
    Tracker("journal", "Evening Journal", [
        f("Highlight", "long_text", "the highlight of the day"),
        f("Gratitude", "short_text", "what the user is grateful for"),
        likert("Stress", 1, 5, "the stress level"),
    ], True, gen_journal),
    # medication and symptoms
    Tracker("medication", "Medication", [
        f("Medication", "short_text", "the name of the medication"),
        f("Dose", "number", "the dose in milligrams"),
        choice("Taken with food", ["yes", "no"], "whether it was taken with food"),
    ], False, gen_medication),
    Tracker("headache", "Headache", [
        likert("Severity", 1, 10, "how severe the headache was"),
        choice("Location", ["forehead", "temples", "back of head", "one side"], "where the headache was"),
        f("Relief", "short_text", "what was tried for relief"),
    ], False, gen_headache),
    Tracker("symptoms", "Cold Symptoms", [
        choice("Symptoms", SYMPTOMS, "the symptoms", multi=True),
        f("Temperature", "number", "the body temperature in degrees celsius"),
        f("Notes", "long_text", "notes about how the user felt"),
    ], True, gen_symptoms),
    # work and productivity
    Tracker("work-session", "Work Session", [
        f("Task", "short_text", "the task worked on"),
        likert("Focus", 1, 5, "how focused the user was"),
        f("Interruptions", "number", "the number of interruptions"),
    ], False, gen_work_session,
            time_field=f("Session", "time_range", "when the work session started and ended")),
    Tracker("daily-work", "Work Day", [
        f("Hours worked", "number", "the number of hours worked"),
        f("Meetings", "number", "the number of meetings"),
        f("Accomplishment", "long_text", "the main accomplishment of the day"),
    ], True, gen_daily_work),
    # social life
    Tracker("social", "Social Interaction", [
        f("Person", "short_text", "the person the user met"),
        choice("Activity", SOCIAL_ACTS, "what they did together"),
        likert("Enjoyment", 1, 5, "how much the user enjoyed it"),
    ], False, gen_social),
    Tracker("daily-social", "Social Summary", [
        f("People met", "number", "the number of people the user talked to"),
        choice("Contact types", CONTACTS, "the kinds of contact", multi=True),
        f("Reflection", "long_text", "reflection about the social day"),
    ], True, gen_daily_social),
    # finance
    Tracker("expense", "Expense", [
        f("Amount", "number", "the amount of money spent"),
        choice("Category", [c for c, _ in STORES], "the spending category"),
        f("Store", "short_text", "where the money was spent"),
    ], False, gen_expense),
    Tracker("daily-budget", "Daily Budget", [
        f("Total spent", "number", "the total money spent"),
        f("Impulse purchases", "number", "the number of impulse purchases"),
        choice("Satisfied", ["yes", "no"], "whether the user is satisfied with the spending"),
    ], True, gen_daily_budget),
    # caffeine and alcohol
    Tracker("coffee", "Coffee", [
        f("Cups", "number", "the number of cups"),
        choice("Type", ["espresso", "latte", "filter coffee", "cappuccino", "americano"], "the type of coffee"),
        choice("Sugar", ["yes", "no"], "whether sugar was added"),
    ], False, gen_coffee),
    Tracker("alcohol", "Alcohol", [
        f("Drinks", "number", "the number of drinks"),
        choice("Beverage", ["beer", "wine", "cocktail", "spirits"], "the kind of drink"),
        f("Occasion", "short_text", "the occasion"),
    ], False, gen_alcohol),
    # hobbies and learning
    Tracker("reading", "Reading", [
        f("Book", "short_text", "the title of the book"),
        f("Pages", "number", "the number of pages read"),
        likert("Enjoyment", 1, 5, "how much the user enjoyed the reading"),
        f("Thoughts", "long_text", "thoughts about the reading"),
    ], False, gen_reading),
    Tracker("music-practice", "Music Practice", [
        choice("Instrument", ["piano", "guitar", "violin", "drums", "singing"], "the instrument practiced"),
        f("Duration", "number", "the practice time in minutes"),
        f("Pieces", "short_text", "the pieces practiced"),
    ], False, gen_practice),
    Tracker("language-study", "Language Study", [
        choice("Language", ["spanish", "french", "german", "japanese", "korean"], "the language studied"),
        f("Minutes", "number", "the minutes spent studying"),
        choice("Activities", LANG_ACTS, "the study activities", multi=True),
        f("New words", "number", "the number of new words learned"),
    ], True, gen_language),
]

DESK = ["exercise", "mood", "sleep-log"]


def author(tracker, count, seed):
    rng = random.Random(f"{seed}:{tracker.tracker_id}")
    samples, seen = [], set()
    i = 0
    while len(samples) < count:
        day = BASE_DAY + dt.timedelta(days=i)
        i += 1
        phrase, values = tracker.gen(rng, day)
        if phrase in seen:
            continue
        seen.add(phrase)
        n = len(samples) + 1
        created = dt.datetime.combine(day, dt.time(rng.randint(7, 22), rng.choice([0, 10, 20, 30, 40, 50])))
        samples.append({
            "sample_id": f"{tracker.tracker_id}-{n:02d}",
            "tracker_id": tracker.tracker_id,
            "phrase": phrase,
            "values": values,
            "origin": "synthetic",
            "created_at": created.strftime("%Y-%m-%dT%H:%M:%SZ"),
        })
    return samples


def write_jsonl(path, records):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as out:
        for r in records:
            out.write(json.dumps(r, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parents[2] / "tests" / "fixtures", type=Path)
    ap.add_argument("--seed", default="corpus-v1")
    args = ap.parse_args()

    assert len(TRACKERS) == 24
    samples = []
    for t in TRACKERS:
        samples += author(t, 21, args.seed)
    write_jsonl(args.out / "corpus" / "schemas.jsonl", [t.schema() for t in TRACKERS])
    write_jsonl(args.out / "corpus" / "samples.jsonl", samples)

    desk = [t for t in TRACKERS if t.tracker_id in DESK]
    desk_samples = [s for t in desk for s in author(t, 7, args.seed + ":desk")]
    write_jsonl(args.out / "desk" / "schemas.jsonl", [t.schema() for t in desk])
    write_jsonl(args.out / "desk" / "samples.jsonl", desk_samples)
    print(f"{len(samples)} corpus samples, {len(desk_samples)} desk samples")


if __name__ == "__main__":
    main()
