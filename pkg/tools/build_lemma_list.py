#!/usr/bin/env python3
"""Build the shipped merged lemma list.

Inputs (committed):
    src/numagree/data/lemmas_coca_ptb.txt   corpus-derived lemma list
Outputs (committed, regenerated by running this script from the repo root):
    src/numagree/data/lemmas_giant_supplement.txt
    src/numagree/data/lemmas.txt             merged list, exactly TARGET_TOTAL

The supplement is drawn from the curated verb pool below (everyday action
verbs in the style of large teaching verb lists: movement, sounds, cooking,
crafts, and so on). Pool entries already present in the corpus list are
dropped; the remainder is thinned deterministically (evenly spaced over the
sorted novel entries) down to the count needed to make the merged list hit
TARGET_TOTAL exactly.
"""

from __future__ import annotations

import re
import sys
from pathlib import Path

TARGET_TOTAL = 3562
DATA = Path(__file__).resolve().parents[1] / "src" / "numagree" / "data"
LEMMA_RE = re.compile(r"[a-z]+(?:-[a-z]+)*")

POOL = """
amble bolt bound canter caper cavort clamber coast crawl creep dart dawdle
descend flit float flounce frolic gallop glide hike hobble hop hurdle hurtle
jog lope lumber lunge lurch meander mosey paddle parade plod prance prowl
race ramble roam rove sashay saunter scamper scoot scramble scurry scuttle
shamble shimmy shuffle sidle skate skedaddle skitter slink slither sneak
somersault sprint stagger stalk stomp stride stroll strut swagger swerve
swim swoop tiptoe toddle totter traipse tramp trample traverse trek trot
trudge vault waddle wade wallow wend whirl wiggle wobble zigzag ascend
circle orbit promenade clump sashay gallivant perambulate hopscotch

babble bark bawl bay blare bleat boo bray burble cackle caw chant cheep
chime chirp chirrup chortle chuckle clack clang clank clatter clink cluck
coo crackle creak croak croon crow drone fizz gargle giggle gobble grunt
guffaw gurgle hiccup hiss honk hoot howl jabber jangle jingle moo mumble
murmur mutter neigh patter peep plink prattle purr quack rasp roar rumble
rustle screech serenade shriek sizzle snarl snicker sniffle snigger snore
snort splutter squawk squeak squeal stammer stutter thrum thud thump tinkle
titter toot trill trumpet twang tweet twitter vocalize warble wheeze whimper
whine whinny whisper whistle whoop yammer yap yell yelp yodel yowl bellow
holler drawl intone hum chatter

bake barbecue baste blanch boil braise broil brown butter caramelize carve
char chomp chug cube devour dice dine drizzle dunk feast ferment fillet
flavor fry garnish gnaw gorge grate grill grind gulp imbibe juice julienne
knead ladle lap marinate mash masticate microwave munch nibble nosh overcook
parboil pare peel pickle poach puree quaff refrigerate reheat roast salt
scald scarf sear season simmer sip skewer slurp snack spice sprinkle steam
steep stew sup swig swill toast undercook whisk zest salivate slosh
garnishee

beckon blush burp clap clench cower cringe crouch cuddle curtsy dab doze
drool drowse exhale faint fidget flex frown gape gawk gaze genuflect
gesticulate gesture glance glare glower grin grip grope hug inhale itch
jostle kneel leer lick lounge nap nestle nuzzle ogle pant peck perspire
pirouette pout pucker recline salute scowl shiver shrug sigh slap slobber
slouch smirk sneeze snooze snuggle spit sprawl squat squint stoop sunbathe
swoon tickle tremble wave wince wink yawn ruffle preen flutter quiver twitch
wriggle squirm fan

ambush annihilate assail assault behead besiege bludgeon bombard brawl
bruise claw club collide decapitate decimate deface defile desecrate
devastate duel eviscerate feud flog gash gouge harpoon impale incinerate jab
lacerate lambaste maim mangle massacre mutilate obliterate pelt persecute
pillage plunder pulverize ram ransack ravage raze retaliate scalp scuffle
skirmish slaughter slay smack smite spar splatter squash stab stone strangle
subjugate suffocate swat terrorize throttle trounce vandalize vanquish
wallop waylay zap bayonet garrison besmirch bloody pummel torch

bevel bind braid brand buff burnish calibrate cobble crochet darn daub dye
embroider emboss engrave etch fasten gild glue grout hew knit lacquer
laminate lubricate mold mortar plane plumb quilt rivet sand sandblast saw
scrape screw sculpt seam sew shear shellac smelt solder spackle splice
staple stencil stitch tan temper tether thread till tinker upholster varnish
veneer weld whittle winch whet anneal crimp dovetail

abbreviate abdicate abduct abet abhor abridge abscond absolve abstain
accentuate acclimate acclimatize accost acquaint adjudicate admonish adore
advocate affirm alphabetize allude amuse annex annotate annoy appall apprise
arbitrate archive assent astonish astound attune authenticate avow awaken
badger baffle bamboozle banter baptize barter befall befriend befuddle
begrudge beguile behold belabor belittle bemoan bemuse bequeath berate
beseech beset bestow betray bewail bewilder bewitch bicker blab blaspheme
blurt bluster boggle browbeat browse cajole canvass capitulate captivate
carp categorize censor censure chastise chide clamor coddle coerce cogitate
cohabit collude commiserate compliment concoct condescend confabulate
confide confound congregate conjecture conjure connive conspire converse
corroborate counsel covet critique daydream debase debrief declaim decode
decry deduce defame deify deign delineate delude demean demoralize demystify
denigrate denote denounce deplore deprecate deride despair despise detest
devalue diagnose dicker digress disavow disbelieve discombobulate disconcert
disenchant dishearten disillusion dismay disorient dissemble distrust
divulge dote dramatize dumbfound elucidate elude emancipate embolden enamor
enchant encode endear enlighten enrage enrapture enthrall enthuse entreat
enumerate enunciate envisage envy equivocate eulogize exalt exasperate
exclaim excoriate exhort exonerate expound extol extrapolate exult fantasize
fathom fawn feign fib flabbergast flatter fluster foretell forewarn
formalize fraternize fume gab gladden gossip grouse grovel grumble gush
harangue hearten heckle hoodwink humiliate hypothesize idolize imbue immerse
immortalize implore improvise incense infer insinuate instruct insult
interject interrogate intimidate intrigue intuit inveigle jeer jest josh
lament lampoon laud liken loathe malign meditate memorize mesmerize
misbehave miscalculate misconstrue misdiagnose misinform misjudge mislead
mispronounce misquote misspell misspeak mistake mistranslate mock moralize
mourn mystify nag narrate negate nitpick notate opine orate ostracize outwit
overhear overreach overrate overthink pacify pander paraphrase parley parrot
perceive perplex personify philosophize pledge pontificate preach
premeditate preoccupy presume prevaricate profess prophesy proselytize
psychoanalyze pun quibble quip rant rebuke recant recite recollect recount
regale rejoice relay relent reminisce remonstrate repent rephrase reprimand
reproach repudiate resonate retell reunify revere rhapsodize ridicule
ruminate sadden satirize scandalize schmooze scheme scoff seethe sermonize
shame shush slander spellbind spook startle stupefy stymie sugarcoat surmise
sympathize tantalize taunt tease telegraph theorize titillate tranquilize
transcribe traumatize tutor uplift vow wheedle wow yearn apprentice mentor
quiz

bathe carpool declutter defrost dehumidify deodorize disinfect dust fumigate
lather mothball neaten primp rake rinse sanitize scrub shampoo shine sponge
squeegee sterilize stow sweep tidy wax wring wrinkle launder

bloom blossom bud burgeon burrow decompose evaporate fertilize flower forage
gestate germinate graze hatch hibernate incubate infest metamorphose migrate
molt nest photosynthesize propagate ripen rust seed swarm thaw thunder wilt
wither hail sleet snow gust frost mist perch prey hunt ape calve ford
effloresce

actuate adjourn affix annul apportion appropriate arraign bankroll bill
broker commission consign copyright cosign counterfeit countersign customize
decertify defray demote deputize disburse disinherit dissent embezzle
encumber endow enfranchise evict expropriate extradite finagle foreclose
impeach invoice litigate monetize nationalize naturalize notarize outbid
outsource overcharge overspend pawn perjure prorate remit remunerate
requisition sanction syndicate tithe trademark underbid vend vest wager
escheat

aerate anesthetize amputate atomize beep bleep boot calcify carbonate
catalyze cauterize chlorinate clone compress crystallize curate debug
decaffeinate decelerate decompress decontaminate dehydrate desalinate
detoxify digitize dilate distill download electrify email emit encrypt
energize equalize extrude fax filter fossilize fuse homogenize hydrate
inoculate ionize irradiate magnetize metabolize modulate mutate neutralize
numb optimize oscillate oxidize pasteurize petrify pressurize pulse quantize
radiate randomize reboot recalibrate recharge sequence solidify sublimate
telecast teleport televise transfuse transmute triangulate upload vaporize
ventilate vulcanize decompile reformat pixelate

bat bicycle bowl box bunt canoe cartwheel dribble dunk fence fumble golf
heave hurl jockey joust kayak lob pedal punt putt referee skateboard sled
snorkel spike surf umpire volley toboggan scull abseil slalom medal

abound ache ail alight align allot allure anger animate arch atrophy augur
avail awe bask beget behoove belch betroth bide billow blanket blaze bleach
blemish blight bloat bluff bob bore botch brandish bristle broach brood
bubble budget bulge bungle bustle capsize caress cascade catalog cave
cherish christen chronicle clothe clutch coalesce coil collate color comb
commute compost conflate congeal consecrate contort convulse corrode cradle
crave crinkle cripple crisscross crumple cull curdle curve dally dangle
daunt dawn daze dazzle debilitate decay decorate deepen deflate dent deplete
detonate devolve dim disembark disintegrate dislodge dismount dither dive
dodge dot douse drench droop dull dwindle eddy elapse emanate embalm embed
emblazon empower encase encircle encrust engulf enshrine ensnare entangle
entomb envelop escort espouse evacuate exhume exterminate fade flail flake
flank flare fleece flick flicker fling flock flop fluff foam foment
foreshadow forestall fortify foul fracture freshen fritter froth gag gird
glimmer glint glisten glitter graft gravitate grease harbor harden harness
harvest heap hitch hoard hoist hook horrify hover huddle hush hypnotize
implant implode impoverish imprint inaugurate incapacitate incise incite
indent infect inhabit inscribe intersect inundate invigorate irrigate jam
jar jettison jiggle jot journey jumble jut juxtapose kindle lapse latch leak
levitate lop lull lurk mar marshal mask masquerade matriculate mellow mend
mingle mire moisten moor mottle muddle muddy muffle mushroom muster muzzle
nab nick nip obsess officiate ooze orchestrate ordain outgrow outlive
outnumber outrun overflow overgrow overheat overlap overload overrun
overshadow overshoot oversleep overtake overwork pamper parch patrol pepper
percolate perish permeate pervade pester petition photograph pilfer pine
pivot playact plop plunk pollinate portend pose prattle preheat prickle prod
proliferate propel prop prune pry pulsate pucker puff pull stretch quench
quiver radiate rake rally ration ravel readjust ream reawaken rebuff recoil
reconvene recuperate redecorate redeploy rediscover redouble reenact
refashion refill reforest regress regrow rehash rehearse rehydrate reignite
rejuvenate rekindle relabel relight remarry remodel renovate reoccur reorder
reorient repack repaint repave replant replay repopulate repot reprint
reroute resurface retrace reupholster revel ricochet rifle rig ripple
roister romp rot rouse rumple rupture sag salvage saturate scatter scavenge
scorch scrawl scrimp scrounge seep seesaw sever shackle shatter sheathe
shepherd shimmer shipwreck shriek shrivel sidestep simper singe skim skulk
slacken slather slay sleet slick slime sling slit sliver slop slosh smear
smolder smudge snag snap snare snip snivel snoop snowball soil sparkle
spatter spew splash splay splinter spoil spout sprain spurt sputter squirt
stack stagnate starch steady steepen stiffen stipple stoke stare strand
stratify strew stub stud subdue submerge subside suckle sully summarize
sunburn supplant surmount swab swaddle swathe swell swirl swish swivel
tabulate tally tame tangle taper tarnish tatter tattoo taxi teem telephone
tempt terrify thatch thicken thin thirst thrash threaten thresh throb thrust
thwack tinge tingle tip tire topple tote tousle tow trawl tread trellis
trespass trickle trim trounce tug tunnel tussle tweak twine twirl typecast
typeset ulcerate unbind unbuckle unburden unbutton unclasp unclog uncoil
uncork underestimate undress undulate unearth unfasten unfurl unhinge unhook
unlatch unlearn unlock unnerve unpack unpin unroll unscrew unseat unsettle
unsnarl unstick untangle untie untwist unzip uproot upend usher vacation
vanish vaccinate vault veil verge vex vie vilify vindicate violate volley
vouch voyage waft wag wallpaper wean weave wedge weed weep welter wheeze
whisk whittle wield wile wither wolf worship wrangle wreathe wriggle wrinkle
yank yawn yearn yield zip zoom garland gleam glut gnash gripe grunt hanker
haggle hallow harry hasten heckle herd hex hinge hiss hog honeymoon hoot
huff humble hurl hustle hyphenate ignite imitate immigrate immunize impede
impersonate implicate imply incline indoctrinate infuse ingratiate inhale
injure inlay innovate inseminate insert inspect instigate insure integrate
intercede intercept interlace interlock intermingle interrupt intersperse
intertwine interview intone intoxicate introspect inventory invert invest
invite invoke iodize irk iron jell jest jibe jilt jinx jostle judder juggle
jumpstart junket keelhaul kennel kidnap kiss knead kneel knight knit knock
knot kowtow label lactate ladle lament laminate lance languish lap lasso
lather laud launch lecture leech leer lend lengthen lessen levy liaise
liberate lick lift lilt limp line linger lisp list listen litter liven load
loan lob lobby locate lodge loft log loiter loll long loop loosen loot lope
lounge love lower lubricate lull lumber lurch lure lurk luxuriate
"""

EXTRA_EXCEPTION_LEMMAS = {
    # rule table would produce *-oes / *-zes misspellings for these
    "boo", "coo", "moo", "shampoo", "tattoo", "shoo", "whiz",
}


def load_words(path: Path) -> list[str]:
    words = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.append(line)
    return words


def main() -> int:
    corpus = load_words(DATA / "lemmas_coca_ptb.txt")
    corpus_set = set(corpus)

    pool: list[str] = []
    for token in POOL.split():
        token = token.strip()
        if not token or token.endswith("?"):
            continue
        if not LEMMA_RE.fullmatch(token):
            print(f"skipping malformed pool entry: {token!r}", file=sys.stderr)
            continue
        pool.append(token)
    novel = sorted(set(pool) - corpus_set)

    need = TARGET_TOTAL - len(corpus_set)
    if len(novel) < need:
        print(
            f"pool too small: need {need} novel lemmas, have {len(novel)}",
            file=sys.stderr,
        )
        return 1

    # deterministic even-spaced thinning keeps alphabetic coverage
    if len(novel) > need:
        picked = [novel[(i * len(novel)) // need] for i in range(need)]
    else:
        picked = novel
    assert len(set(picked)) == need

    supplement = sorted(picked)
    merged = sorted(corpus_set | set(supplement))
    assert len(merged) == TARGET_TOTAL, len(merged)

    sup_path = DATA / "lemmas_giant_supplement.txt"
    with open(sup_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# supplementary verb lemmas (see tools/build_lemma_list.py)\n")
        for word in supplement:
            fh.write(word + "\n")

    merged_path = DATA / "lemmas.txt"
    with open(merged_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# merged verb lemma list: corpus-derived + supplement\n")
        for word in merged:
            fh.write(word + "\n")

    print(f"corpus: {len(corpus_set)}  supplement: {len(supplement)}  merged: {len(merged)}")
    picked_exceptions = EXTRA_EXCEPTION_LEMMAS & set(merged)
    print(f"supplement lemmas needing inflection exceptions: {sorted(picked_exceptions)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
