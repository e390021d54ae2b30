"""Physics-enhanced semantic transmission of radiomaps.

Thin Python surface over the C++ core: scene synthesis, LDPL fitting, radio
depth maps, VQ/JPEG-style segmentation codecs, the bit-exact payload format
with a noisy channel, the conditional generative reconstructor and federated
training.
"""

from radiosem._radiosem import *  # noqa: F401,F403
from radiosem._radiosem import __doc__  # noqa: F401
