from rest_framework.routers import DefaultRouter
from .views import GeneratedImageViewSet

router = DefaultRouter()
router.register(r'', GeneratedImageViewSet, basename='generated')

urlpatterns = router.urls
